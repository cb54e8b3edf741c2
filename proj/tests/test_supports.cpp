#include <doctest.h>

#include <cmath>

#include "binbias/supports.hpp"

using namespace binbias;

TEST_CASE("normalize_domain rescales onto [-1, 1]") {
    const auto nd = normalize_domain({0.0, 10.0}, {3.0, 7.0});
    CHECK(nd.data.xs == std::vector<double>{-1.0, 1.0});
    CHECK(nd.x_map.inverse(-1.0) == doctest::Approx(0.0));
    CHECK(nd.x_map.inverse(1.0) == doctest::Approx(10.0));

    const auto nd3 = normalize_domain({0.0, 5.0, 10.0}, {1.0, 2.0, 3.0});
    CHECK(nd3.data.xs == std::vector<double>{-1.0, 0.0, 1.0});

    // unsorted input gets sorted, labels carried along
    const auto ndu = normalize_domain({10.0, 0.0, 5.0}, {3.0, 1.0, 2.0});
    CHECK(ndu.data.ys == std::vector<double>{1.0, 2.0, 3.0});

    CHECK_THROWS(normalize_domain({1.0, 1.0}, {0.0, 0.0}));
    CHECK_THROWS(normalize_domain({1.0}, {0.0}));
}

TEST_CASE("compute_r_reg finds slope changes") {
    SortedDataset abs_data{{-1.0, -0.5, 0.0, 0.5, 1.0}, {1.0, 0.5, 0.0, 0.5, 1.0}};
    const auto r = compute_r_reg(abs_data);
    CHECK(r.points == std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(r.indices == std::vector<int>{1, 3, 5});

    SortedDataset line{{-1.0, -0.2, 0.4, 1.0}, {}};
    line.ys.resize(4);
    for (std::size_t i = 0; i < 4; ++i) line.ys[i] = 0.5 * line.xs[i] + 0.5;
    const auto rl = compute_r_reg(line);
    CHECK(rl.points == std::vector<double>{-1.0, 1.0});

    SortedDataset tri{{-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
    const auto rt = compute_r_reg(tri);
    CHECK(rt.points == std::vector<double>{-1.0, 0.0, 1.0});
}

TEST_CASE("compute_r_class finds label boundaries") {
    SortedDataset data{{-1.0, -0.6, -0.2, 0.2, 0.6, 1.0}, {1, 1, 2, 2, 2, 3}};
    const auto r = compute_r_class(data);
    CHECK(r.indices == std::vector<int>{1, 2, 3, 5, 6});

    SortedDataset constant{{-1.0, 0.0, 1.0}, {2, 2, 2}};
    CHECK(compute_r_class(constant).indices == std::vector<int>{1, 3});

    SortedDataset alt{{-1.0, -0.3, 0.3, 1.0}, {1, 2, 1, 2}};
    CHECK(compute_r_class(alt).indices == std::vector<int>{1, 2, 3, 4});

    SortedDataset bad{{-1.0, 1.0}, {1.5, 2.0}};
    CHECK_THROWS(compute_r_class(bad));
}

TEST_CASE("support sets always contain the endpoints") {
    SortedDataset data{{-1.0, -0.1, 0.7, 1.0}, {0.2, 0.9, 0.1, 0.5}};
    const auto r = compute_r_reg(data);
    CHECK(r.points.front() == -1.0);
    CHECK(r.points.back() == 1.0);
    // fully generic labels flag every interior point
    CHECK(r.points.size() == 4);

    const auto feats = r.feature_set();
    CHECK(feats.size() == 8);
    CHECK(feats.front().s == 1);
    CHECK(feats.back().s == -1);
}
