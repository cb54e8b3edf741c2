#pragma once

#include <vector>

namespace binbias {

// Discretization of [0, 1] into k bins described by their midpoints,
// 0 = lambda_1 < ... < lambda_k = 1. Class indices are 1-based.
struct BinSpec {
    std::vector<double> midpoints;

    explicit BinSpec(std::vector<double> mids);
    int k() const { return static_cast<int>(midpoints.size()); }
};

// Uniform bins: lambda_j = (j - 1) / (k - 1).
BinSpec make_uniform_bins(int k);

// Nearest-midpoint class of y in [0, 1]; ties go to the left-most bin.
// Values outside [0, 1] by more than 1e-9 are rejected, within that
// tolerance they are clamped.
int encode(double y, const BinSpec& bins);

// Softmax-expected value over the bin midpoints, in [0, 1].
double decode_expectation(const std::vector<double>& scores, const BinSpec& bins);

} // namespace binbias
