#pragma once

#include <vector>

#include "binbias/features.hpp"

namespace binbias {

// Affine map of [lo, lo + span] onto [-1, 1], stored so that grid
// points with exactly representable relative positions map exactly.
struct AffineMap {
    double in_lo = -1.0;
    double in_span = 2.0;

    double forward(double x) const { return 2.0 * ((x - in_lo) / in_span) - 1.0; }
    double inverse(double t) const { return in_lo + in_span * (t + 1.0) / 2.0; }
};

// Ordered 1-D data with -1 = x_1 < ... < x_n = 1. ys holds real labels
// for regression or exact class indices (1-based) for classification.
struct SortedDataset {
    std::vector<double> xs;
    std::vector<double> ys;

    std::size_t n() const { return xs.size(); }

    // Validated view of ys as class indices in [k].
    std::vector<int> class_labels() const;
};

struct NormalizedDataset {
    SortedDataset data;
    AffineMap x_map; // original x -> [-1, 1]
};

// Sorts by x and rescales the domain affinely onto [-1, 1] with exact
// endpoints. Duplicate x values and fewer than 2 points are errors.
NormalizedDataset normalize_domain(const std::vector<double>& xs,
                                   const std::vector<double>& ys);

// Optimal-support point set: always contains both endpoints.
struct SupportSet {
    std::vector<double> points;
    std::vector<int> indices; // 1-based positions into the dataset

    // {-1, +1} x points
    std::vector<Feature> feature_set() const;
    bool contains_point(double x, double tol = 0.0) const;
};

// Kinks of the piecewise-linear interpolant: endpoints plus every data
// point where the incoming and outgoing slopes differ.
SupportSet compute_r_reg(const SortedDataset& data);

// Endpoints plus every point whose label differs from either adjacent
// neighbour.
SupportSet compute_r_class(const SortedDataset& data);

} // namespace binbias
