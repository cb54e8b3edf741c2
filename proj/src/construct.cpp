#include "binbias/construct.hpp"

#include <cmath>
#include <stdexcept>

namespace binbias {

double InterpolantPlan::eval(const SortedDataset& data, double x) const {
    // segment whose left breakpoint is the last one <= x (clamped)
    std::size_t l = 0;
    while (l + 1 < slopes.size() && x >= data.xs[breakpoints[l + 1]]) ++l;
    const double x0 = data.xs[breakpoints[l]];
    const double y0 = data.ys[breakpoints[l]];
    return y0 + slopes[l] * (x - x0);
}

InterpolantPlan make_interpolant_plan(const SortedDataset& data, bool dense) {
    InterpolantPlan plan;
    if (dense) {
        for (std::size_t i = 0; i < data.n(); ++i)
            plan.breakpoints.push_back(static_cast<int>(i));
    } else {
        for (int idx : compute_r_reg(data).indices) plan.breakpoints.push_back(idx - 1);
    }
    const std::size_t m = plan.breakpoints.size();
    if (m < 2) throw std::invalid_argument("make_interpolant_plan: need >= 2 breakpoints");
    plan.slopes.resize(m - 1);
    for (std::size_t l = 0; l + 1 < m; ++l) {
        const int a = plan.breakpoints[l];
        const int b = plan.breakpoints[l + 1];
        plan.slopes[l] = (data.ys[b] - data.ys[a]) / (data.xs[b] - data.xs[a]);
    }
    return plan;
}

AtomicMeasure build_feasible_reg(const SortedDataset& data, bool dense) {
    const auto plan = make_interpolant_plan(data, dense);
    const double y1 = data.ys.front();
    const double gamma1 = plan.slopes.front();

    AtomicMeasure mu(1);
    // boundary atoms realizing the first segment: w_l (x+1)_+ + w_r (1-x)_+
    mu.add_atom({-1, data.xs.back()}, y1 / 2.0);
    mu.add_atom({1, data.xs.front()}, y1 / 2.0 + gamma1);
    // one rightward atom per interior breakpoint carrying the slope change
    for (std::size_t l = 1; l + 1 < plan.breakpoints.size(); ++l) {
        const double dgamma = plan.slopes[l] - plan.slopes[l - 1];
        mu.add_atom({1, data.xs[plan.breakpoints[l]]}, dgamma);
    }
    return mu;
}

AtomicMeasure build_feasible_class(const SortedDataset& data, int k, bool dense) {
    if (k < 1) throw std::invalid_argument("build_feasible_class: k must be >= 1");
    const auto labels = data.class_labels();
    for (int y : labels)
        if (y > k) throw std::invalid_argument("build_feasible_class: label exceeds k");

    AtomicMeasure mu(static_cast<std::size_t>(k));
    SortedDataset column{data.xs, {}};
    column.ys.resize(data.n());
    for (int l = 1; l <= k; ++l) {
        for (std::size_t i = 0; i < data.n(); ++i)
            column.ys[i] = labels[i] == l ? 1.0 : 0.0;
        const AtomicMeasure mul = build_feasible_reg(column, dense);
        for (const auto& a : mul.atoms()) {
            std::vector<double> w(k, 0.0);
            w[l - 1] = a.w[0];
            mu.add_atom(a.u, std::move(w));
        }
    }
    return mu;
}

} // namespace binbias
