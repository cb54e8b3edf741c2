#include "binbias/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "binbias/binning.hpp"
#include "binbias/rng.hpp"

namespace binbias {

double TeacherSpec::eval1d(double x) const {
    if (is_network)
        throw std::invalid_argument("TeacherSpec: network teacher is not 1-D");
    const double raw = measure_eval_scalar(measure, x);
    return y_span == 0.0 ? 0.0 : (raw - y_lo) / y_span;
}

double TeacherSpec::eval2d_raw(double x1, double x2) const {
    if (!is_network)
        throw std::invalid_argument("TeacherSpec: measure teacher is not 2-D");
    Matrix in(1, 2);
    in(0, 0) = x1;
    in(0, 1) = x2;
    return forward(network, in)(0, 0);
}

TeacherSpec default_triangle_teacher() {
    TeacherSpec teacher;
    // triangle of height h and half-width hw peaking at p contributes
    // slope atoms (h/hw) at p-hw, -2(h/hw) at p, (h/hw) at p+hw
    const auto add_triangle = [&](double peak, double half_width, double height) {
        const double slope = height / half_width;
        teacher.measure.add_atom({1, peak - half_width}, slope);
        teacher.measure.add_atom({1, peak}, -2.0 * slope);
        teacher.measure.add_atom({1, peak + half_width}, slope);
    };
    add_triangle(-0.5, 0.5, 1.0);
    add_triangle(0.5, 0.5, 1.0);
    add_triangle(-0.1, 0.1, 0.12);
    add_triangle(0.1, 0.1, 0.12);

    // min-max over [-1, 1]: a piecewise-linear graph attains its extremes
    // at kinks or domain endpoints
    std::vector<double> probes{-1.0, 1.0};
    for (const auto& a : teacher.measure.atoms()) probes.push_back(a.u.c);
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (double x : probes) {
        if (x < -1.0 || x > 1.0) continue;
        const double v = measure_eval_scalar(teacher.measure, x);
        lo = first ? v : std::min(lo, v);
        hi = first ? v : std::max(hi, v);
        first = false;
    }
    teacher.y_lo = lo;
    teacher.y_span = hi - lo;
    return teacher;
}

TeacherSpec random_network_teacher(int hidden, std::uint64_t seed) {
    if (hidden < 1) throw std::invalid_argument("random_network_teacher: hidden < 1");
    TeacherSpec teacher;
    teacher.is_network = true;
    teacher.network = init_he({2, static_cast<std::size_t>(hidden), 1}, seed);
    return teacher;
}

SortedDataset sample_stratified_1d(const TeacherSpec& teacher, int n, int k,
                                   std::uint64_t seed) {
    if (n < 2 || k < 2) throw std::invalid_argument("sample_stratified_1d: need n, k >= 2");
    if (n % k != 0) throw std::invalid_argument("sample_stratified_1d: k must divide n");
    const int quota = n / k;
    const BinSpec bins = make_uniform_bins(k);
    std::vector<int> count(k, 0);
    std::vector<double> xs, ys;

    const auto try_accept = [&](double x) {
        const double y = teacher.eval1d(x);
        const int bin = encode(y, bins);
        if (count[bin - 1] >= quota) return false;
        if (std::find(xs.begin(), xs.end(), x) != xs.end()) return false;
        ++count[bin - 1];
        xs.push_back(x);
        ys.push_back(y);
        return true;
    };

    // pin the domain endpoints first, within their own bins' quotas
    if (!try_accept(-1.0) || !try_accept(1.0))
        throw std::runtime_error(
            "sample_stratified_1d: endpoint labels overflow their bin quota");

    Rng rng(seed);
    const long budget = 1000000L * k;
    long proposals = 0;
    int filled = static_cast<int>(xs.size());
    while (filled < n) {
        if (++proposals > budget) {
            int starved = 0;
            for (int j = 0; j < k; ++j)
                if (count[j] < quota) {
                    starved = j + 1;
                    break;
                }
            throw std::runtime_error("sample_stratified_1d: bin " + std::to_string(starved) +
                                     " starved after rejection budget");
        }
        if (try_accept(rng.uniform(-1.0, 1.0))) ++filled;
    }

    std::vector<std::size_t> order(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    SortedDataset data;
    for (std::size_t i : order) {
        data.xs.push_back(xs[i]);
        data.ys.push_back(ys[i]);
    }
    return data;
}

GridDataset2d sample_grid_2d(const TeacherSpec& teacher, int side, int k) {
    if (side < 2) throw std::invalid_argument("sample_grid_2d: side must be >= 2");
    if (k < 2) throw std::invalid_argument("sample_grid_2d: k must be >= 2");
    GridDataset2d grid;
    grid.side = side;
    grid.inputs = Matrix(static_cast<std::size_t>(side) * side, 2);
    grid.ys.resize(grid.inputs.rows);
    std::size_t idx = 0;
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const double x1 = -1.0 + 2.0 * c / (side - 1);
            const double x2 = -1.0 + 2.0 * r / (side - 1);
            grid.inputs(idx, 0) = x1;
            grid.inputs(idx, 1) = x2;
            grid.ys[idx] = teacher.eval2d_raw(x1, x2);
            ++idx;
        }
    }
    const auto [lo_it, hi_it] = std::minmax_element(grid.ys.begin(), grid.ys.end());
    grid.y_lo = *lo_it;
    grid.y_span = *hi_it - *lo_it;
    for (double& y : grid.ys)
        y = grid.y_span == 0.0 ? 0.0 : (y - grid.y_lo) / grid.y_span;
    return grid;
}

} // namespace binbias
