#pragma once

#include "binbias/features.hpp"
#include "binbias/supports.hpp"

namespace binbias {

// Breakpoints and per-segment slopes of the piecewise-linear interpolant.
struct InterpolantPlan {
    std::vector<int> breakpoints;  // 0-based indices into the data, includes 0 and n-1
    std::vector<double> slopes;    // slope of segment l, between breakpoints l and l+1

    double eval(const SortedDataset& data, double x) const;
};

InterpolantPlan make_interpolant_plan(const SortedDataset& data, bool dense = false);

// Exact interpolating measure for regression data: two boundary atoms
// fix the first line segment, one rightward atom per interior breakpoint
// carries the slope change. Satisfies f_mu(x_i) = y_i for all i.
// With dense = true, breakpoints are placed at every data point instead
// of only at slope changes.
AtomicMeasure build_feasible_reg(const SortedDataset& data, bool dense = false);

// Stacks k scalar interpolants of the one-hot label columns, so that
// f_mu(x_i) equals the y_i-th canonical basis vector. All margin
// constraints of the classification problem hold with margin exactly 1.
AtomicMeasure build_feasible_class(const SortedDataset& data, int k, bool dense = false);

} // namespace binbias
