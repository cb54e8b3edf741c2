#include <doctest.h>

#include <cmath>

#include "binbias/binning.hpp"

using namespace binbias;

TEST_CASE("make_uniform_bins") {
    const auto b5 = make_uniform_bins(5);
    CHECK(b5.midpoints == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    const auto b2 = make_uniform_bins(2);
    CHECK(b2.midpoints == std::vector<double>{0.0, 1.0});
    const auto b50 = make_uniform_bins(50);
    CHECK(b50.midpoints[1] == doctest::Approx(1.0 / 49.0));
    CHECK_THROWS(make_uniform_bins(1));
}

TEST_CASE("encode picks the nearest midpoint, ties leftward") {
    const auto bins = make_uniform_bins(5);
    CHECK(encode(0.26, bins) == 2);
    CHECK(encode(0.125, bins) == 1); // exact tie between bins 1 and 2
    CHECK(encode(1.0, bins) == 5);
    CHECK(encode(0.0, bins) == 1);
    CHECK_THROWS(encode(1.1, bins));
    CHECK_THROWS(encode(-0.1, bins));
    CHECK(encode(1.0 + 1e-10, bins) == 5); // inside clamp tolerance
}

TEST_CASE("encode error is at most half the local gap") {
    const auto bins = make_uniform_bins(7);
    for (int g = 0; g <= 1000; ++g) {
        const double y = static_cast<double>(g) / 1000.0;
        const int j = encode(y, bins);
        double half_gap = 0.0;
        if (j > 1) half_gap = std::max(half_gap, (bins.midpoints[j - 1] - bins.midpoints[j - 2]) / 2);
        if (j < bins.k()) half_gap = std::max(half_gap, (bins.midpoints[j] - bins.midpoints[j - 1]) / 2);
        CHECK(std::abs(y - bins.midpoints[j - 1]) <= half_gap + 1e-12);
    }
}

TEST_CASE("decode_expectation") {
    const auto bins = make_uniform_bins(5);
    CHECK(decode_expectation({3.0, 3.0, 3.0, 3.0, 3.0}, bins) == doctest::Approx(0.5));
    CHECK(decode_expectation({400.0, 0.0, 0.0, 0.0, 0.0}, bins) == doctest::Approx(0.0));
    const BinSpec three({0.0, 0.5, 1.0});
    CHECK(decode_expectation({0.0, 10.0, 0.0}, three) == doctest::Approx(0.5));
}

TEST_CASE("decode is shift invariant and consistent with encode") {
    const auto bins = make_uniform_bins(6);
    const std::vector<double> scores{0.3, -1.2, 2.0, 0.0, 1.1, -0.4};
    std::vector<double> shifted(scores);
    for (double& v : shifted) v += 57.0;
    CHECK(decode_expectation(scores, bins) ==
          doctest::Approx(decode_expectation(shifted, bins)).epsilon(1e-12));

    // one-hot dominant scores decode to the argmax midpoint
    for (int j = 0; j < bins.k(); ++j) {
        std::vector<double> hot(bins.k(), 0.0);
        hot[j] = 60.0;
        const double y = decode_expectation(hot, bins);
        CHECK(y == doctest::Approx(bins.midpoints[j]).epsilon(1e-9));
        CHECK(encode(y, bins) == j + 1);
    }
}
