#include "binbias/supports.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace binbias {

std::vector<int> SortedDataset::class_labels() const {
    std::vector<int> out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double r = std::round(ys[i]);
        if (std::abs(ys[i] - r) > 1e-9 || r < 1.0)
            throw std::invalid_argument("SortedDataset: ys are not class indices in [k]");
        out[i] = static_cast<int>(r);
    }
    return out;
}

NormalizedDataset normalize_domain(const std::vector<double>& xs,
                                   const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("normalize_domain: xs/ys length mismatch");
    if (xs.size() < 2)
        throw std::invalid_argument("normalize_domain: need at least 2 points");

    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

    for (std::size_t i = 1; i < order.size(); ++i)
        if (xs[order[i]] == xs[order[i - 1]])
            throw std::invalid_argument("normalize_domain: duplicate x values");

    const double lo = xs[order.front()];
    const double hi = xs[order.back()];
    AffineMap map{lo, hi - lo};

    SortedDataset data;
    data.xs.resize(xs.size());
    data.ys.resize(xs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        data.xs[i] = map.forward(xs[order[i]]);
        data.ys[i] = ys[order[i]];
    }
    data.xs.front() = -1.0; // pin endpoints exactly
    data.xs.back() = 1.0;
    return {std::move(data), map};
}

std::vector<Feature> SupportSet::feature_set() const {
    std::vector<Feature> out;
    out.reserve(2 * points.size());
    for (double p : points) out.push_back({1, p});
    for (double p : points) out.push_back({-1, p});
    return out;
}

bool SupportSet::contains_point(double x, double tol) const {
    for (double p : points)
        if (std::abs(p - x) <= tol) return true;
    return false;
}

SupportSet compute_r_reg(const SortedDataset& data) {
    const std::size_t n = data.n();
    if (n < 2) throw std::invalid_argument("compute_r_reg: need n >= 2");

    std::vector<double> slopes(n - 1);
    double max_slope = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        slopes[i] = (data.ys[i + 1] - data.ys[i]) / (data.xs[i + 1] - data.xs[i]);
        max_slope = std::max(max_slope, std::abs(slopes[i]));
    }
    const double tol = 1e-9 * (max_slope + 1.0);

    SupportSet out;
    out.points.push_back(data.xs.front());
    out.indices.push_back(1);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (std::abs(slopes[i] - slopes[i - 1]) > tol) {
            out.points.push_back(data.xs[i]);
            out.indices.push_back(static_cast<int>(i) + 1);
        }
    }
    out.points.push_back(data.xs.back());
    out.indices.push_back(static_cast<int>(n));
    return out;
}

SupportSet compute_r_class(const SortedDataset& data) {
    const std::size_t n = data.n();
    if (n < 2) throw std::invalid_argument("compute_r_class: need n >= 2");
    const auto labels = data.class_labels();

    SupportSet out;
    out.points.push_back(data.xs.front());
    out.indices.push_back(1);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (labels[i] != labels[i - 1] || labels[i] != labels[i + 1]) {
            out.points.push_back(data.xs[i]);
            out.indices.push_back(static_cast<int>(i) + 1);
        }
    }
    out.points.push_back(data.xs.back());
    out.indices.push_back(static_cast<int>(n));
    return out;
}

} // namespace binbias
