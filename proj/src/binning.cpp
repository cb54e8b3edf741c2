#include "binbias/binning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace binbias {

BinSpec::BinSpec(std::vector<double> mids) : midpoints(std::move(mids)) {
    if (midpoints.size() < 2)
        throw std::invalid_argument("BinSpec: need at least 2 bins");
    if (midpoints.front() != 0.0 || midpoints.back() != 1.0)
        throw std::invalid_argument("BinSpec: midpoints must start at 0 and end at 1");
    for (std::size_t j = 1; j < midpoints.size(); ++j)
        if (!(midpoints[j] > midpoints[j - 1]))
            throw std::invalid_argument("BinSpec: midpoints must be strictly increasing");
}

BinSpec make_uniform_bins(int k) {
    if (k < 2) throw std::invalid_argument("make_uniform_bins: k must be >= 2");
    std::vector<double> mids(k);
    for (int j = 0; j < k; ++j) mids[j] = static_cast<double>(j) / (k - 1);
    mids.back() = 1.0;
    return BinSpec(std::move(mids));
}

int encode(double y, const BinSpec& bins) {
    constexpr double tol = 1e-9;
    if (y < -tol || y > 1.0 + tol)
        throw std::invalid_argument("encode: label outside [0, 1]");
    y = std::clamp(y, 0.0, 1.0);
    int best = 1;
    double best_d = std::abs(y - bins.midpoints[0]);
    for (int j = 1; j < bins.k(); ++j) {
        const double d = std::abs(y - bins.midpoints[j]);
        if (d < best_d) {
            best_d = d;
            best = j + 1;
        }
    }
    return best;
}

double decode_expectation(const std::vector<double>& scores, const BinSpec& bins) {
    if (static_cast<int>(scores.size()) != bins.k())
        throw std::invalid_argument("decode_expectation: score length does not match k");
    const double zmax = *std::max_element(scores.begin(), scores.end());
    if (!std::isfinite(zmax))
        throw std::invalid_argument("decode_expectation: non-finite score");
    double denom = 0.0, num = 0.0;
    for (int j = 0; j < bins.k(); ++j) {
        const double e = std::exp(scores[j] - zmax);
        denom += e;
        num += e * bins.midpoints[j];
    }
    return num / denom;
}

} // namespace binbias
