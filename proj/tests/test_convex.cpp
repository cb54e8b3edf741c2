#include <doctest.h>

#include <cmath>

#include "binbias/construct.hpp"
#include "binbias/convex.hpp"
#include "binbias/rng.hpp"

using namespace binbias;

namespace {

SortedDataset random_instance(Rng& rng, int max_n) {
    const int n = 2 + static_cast<int>(rng.below(max_n - 1));
    SortedDataset data;
    data.xs.push_back(-1.0);
    for (int i = 0; i < n - 2; ++i) data.xs.push_back(rng.uniform(-0.99, 0.99));
    data.xs.push_back(1.0);
    std::sort(data.xs.begin(), data.xs.end());
    data.xs.erase(std::unique(data.xs.begin(), data.xs.end()), data.xs.end());
    for (std::size_t i = 0; i < data.xs.size(); ++i) data.ys.push_back(rng.uniform(-1.0, 1.0));
    return data;
}

} // namespace

TEST_CASE("feature dictionary reproduces feature_eval") {
    const std::vector<double> xs{-1.0, -0.25, 0.5, 1.0};
    const auto dict = FeatureDictionary::from_points(xs);
    REQUIRE(dict.features.size() == 8);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < dict.features.size(); ++j) {
            CHECK(dict.phi(i, j) == feature_eval(dict.features[j], xs[i]));
            CHECK(dict.phi(i, j) >= 0.0);
        }
}

TEST_CASE("brute force oracle on the named instances") {
    SortedDataset tri{{-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
    CHECK(brute_force_reg_oracle(tri) == doctest::Approx(3.0).epsilon(1e-10));

    SortedDataset zero{{-1.0, 0.0, 1.0}, {0.0, 0.0, 0.0}};
    CHECK(brute_force_reg_oracle(zero) == 0.0);

    SortedDataset ident{{-1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0}};
    CHECK(brute_force_reg_oracle(ident) == doctest::Approx(1.0).epsilon(1e-10));

    SortedDataset big{{-1.0, -0.5, 0.0, 0.5, 0.7, 0.8, 1.0}, {0, 1, 0, 1, 0, 1, 0}};
    CHECK_THROWS(brute_force_reg_oracle(big));
}

TEST_CASE("solve_reg_tv on the triangle instance") {
    SortedDataset tri{{-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
    const auto res = solve_reg_tv(tri);
    CHECK(res.certificate.objective == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(res.certificate.dual_objective == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(std::abs(res.certificate.gap) <= 1e-8 * 4.0);
    CHECK(res.certificate.max_dual_norm == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(res.certificate.certified);
    // the dual vertex is unique here
    REQUIRE(res.certificate.alphas.size() == 3);
    CHECK(res.certificate.alphas[0][0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(res.certificate.alphas[1][0] == doctest::Approx(-3.0).epsilon(1e-8));
    CHECK(res.certificate.alphas[2][0] == doctest::Approx(1.0).epsilon(1e-8));
    // interpolation holds
    for (std::size_t i = 0; i < tri.n(); ++i)
        CHECK(measure_eval_scalar(res.measure, tri.xs[i]) ==
              doctest::Approx(tri.ys[i]).epsilon(1e-9));
}

TEST_CASE("solve_reg_tv edge cases") {
    SortedDataset zero{{-1.0, 0.2, 1.0}, {0.0, 0.0, 0.0}};
    const auto rz = solve_reg_tv(zero);
    CHECK(rz.certificate.objective == doctest::Approx(0.0));
    CHECK(rz.measure.empty());

    SortedDataset ident{{-1.0, 0.0, 1.0}, {-1.0, 0.0, 1.0}};
    const auto ri = solve_reg_tv(ident);
    CHECK(ri.certificate.objective == doctest::Approx(1.0).epsilon(1e-9));

    SortedDataset line{{-1.0, -0.5, 0.25, 1.0}, {0.0, 0.25, 0.625, 1.0}};
    const auto rl = solve_reg_tv(line);
    CHECK(rl.certificate.objective ==
          doctest::Approx(brute_force_reg_oracle(line)).epsilon(1e-9));
}

TEST_CASE("solver matches the oracle on 200 random small instances") {
    Rng rng(314159);
    for (int trial = 0; trial < 200; ++trial) {
        const auto data = random_instance(rng, 6);
        const auto res = solve_reg_tv(data);
        const double oracle = brute_force_reg_oracle(data);
        CHECK(std::abs(res.certificate.objective - oracle) <= 1e-8 * (1.0 + oracle));
        CHECK(std::abs(res.certificate.gap) <=
              1e-8 * (1.0 + std::abs(res.certificate.objective)));
        CHECK(res.certificate.max_dual_norm <= 1.0 + 1e-8);
        for (std::size_t i = 0; i < data.n(); ++i)
            CHECK(measure_eval_scalar(res.measure, data.xs[i]) ==
                  doctest::Approx(data.ys[i]).epsilon(1e-7));
    }
}

TEST_CASE("check_dual_feasible evaluates the kink profile") {
    SortedDataset tri{{-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
    const auto tight = check_dual_feasible({{1.0}, {-3.0}, {1.0}}, tri, NormKind::Absolute);
    CHECK(tight.max_dual_norm == doctest::Approx(1.0));
    CHECK(tight.certified);

    const auto zero = check_dual_feasible({{0.0}, {0.0}, {0.0}}, tri, NormKind::Absolute);
    CHECK(zero.max_dual_norm == 0.0);

    const auto infeas = check_dual_feasible({{10.0}, {0.0}, {0.0}}, tri, NormKind::Absolute);
    CHECK(infeas.max_dual_norm == doctest::Approx(20.0)); // h(1) = 10 * (1 - (-1))
    CHECK_FALSE(infeas.certified);
}

TEST_CASE("dual field is piecewise affine: grid max never beats kink max") {
    Rng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        const auto data = random_instance(rng, 8);
        std::vector<std::vector<double>> alphas(data.n());
        for (auto& a : alphas) a = {rng.normal()};
        const double kink_max =
            check_dual_feasible(alphas, data, NormKind::Absolute).max_dual_norm;
        double grid_max = 0.0;
        for (int g = 0; g <= 2000; ++g) {
            const double c = -1.0 + 2.0 * g / 2000.0;
            grid_max = std::max(grid_max,
                                dual_norm_at(alphas, data.xs, {1, c}, NormKind::Absolute));
            grid_max = std::max(grid_max,
                                dual_norm_at(alphas, data.xs, {-1, c}, NormKind::Absolute));
        }
        CHECK(grid_max <= kink_max + 1e-10);
    }
}

TEST_CASE("extend_certificate zero-pads") {
    const auto ext = extend_certificate({{1.0}, {1.0}}, {1, 3}, 3, 1);
    REQUIRE(ext.size() == 3);
    CHECK(ext[0][0] == 1.0);
    CHECK(ext[1][0] == 0.0);
    CHECK(ext[2][0] == 1.0);

    const auto empty = extend_certificate({}, {}, 4, 2);
    for (const auto& a : empty)
        for (double v : a) CHECK(v == 0.0);

    // identity extension when the subset is everything
    const auto id = extend_certificate({{1.0}, {-3.0}, {1.0}}, {1, 2, 3}, 3, 1);
    CHECK(id[1][0] == -3.0);

    // feasibility at subset kinks agrees between subset and extension
    SortedDataset tri{{-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
    SortedDataset sub{{-1.0, 1.0}, {0.0, 0.0}};
    const std::vector<std::vector<double>> sub_alpha{{0.4}, {-0.2}};
    const auto padded = extend_certificate(sub_alpha, {1, 3}, 3, 1);
    for (double c : sub.xs) {
        for (int s : {-1, 1}) {
            CHECK(dual_norm_at(sub_alpha, sub.xs, {s, c}, NormKind::Absolute) ==
                  doctest::Approx(dual_norm_at(padded, tri.xs, {s, c}, NormKind::Absolute)));
        }
    }
}

TEST_CASE("solve_class_tv on the two-point instance") {
    SortedDataset data{{-1.0, 1.0}, {1, 2}};
    const auto res = solve_class_tv(data, 2);
    CHECK(res.certificate.certified);
    CHECK(res.certificate.objective ==
          doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-5));
    CHECK(res.certificate.max_dual_norm <= 1.0 + 1e-8);
    // unique optimum: weight (1/4, -1/4) at (-1, 1) and (-1/4, 1/4) at (+1, -1)
    for (const auto& a : res.measure.atoms()) {
        if (std::abs(a.w[0]) < 1e-6) continue;
        if (a.u.s == -1) {
            CHECK(a.u.c == doctest::Approx(1.0));
            CHECK(a.w[0] == doctest::Approx(0.25).epsilon(1e-3));
            CHECK(a.w[1] == doctest::Approx(-0.25).epsilon(1e-3));
        } else {
            CHECK(a.u.c == doctest::Approx(-1.0));
            CHECK(a.w[0] == doctest::Approx(-0.25).epsilon(1e-3));
            CHECK(a.w[1] == doctest::Approx(0.25).epsilon(1e-3));
        }
    }
}

TEST_CASE("solve_class_tv with constant labels matches the analytic optimum") {
    // constant label forces f_{y} - f_l >= 1, cheapest is a constant vector
    SortedDataset data{{-1.0, 1.0}, {1, 1}};
    const int k = 3;
    const auto res = solve_class_tv(data, k);
    CHECK(res.certificate.certified);
    // min ||v|| with v_1 - v_l >= 1 for l = 2, 3 is v = (2/3, -1/3, -1/3),
    // split across the two boundary atoms: objective = ||v|| = sqrt(6)/3
    CHECK(res.certificate.objective == doctest::Approx(std::sqrt(6.0) / 3.0).epsilon(1e-5));
    // margins hold at both points
    const auto labels = data.class_labels();
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto f = measure_eval(res.measure, data.xs[i]);
        for (int l = 1; l <= k; ++l)
            if (l != labels[i]) CHECK(f[labels[i] - 1] - f[l - 1] >= 1.0 - 1e-6);
    }
}

TEST_CASE("build_feasible_class output is feasible for the margin problem") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(6));
        const int k = 2 + static_cast<int>(rng.below(3));
        SortedDataset data;
        data.xs.push_back(-1.0);
        for (int i = 0; i < n - 2; ++i) data.xs.push_back(rng.uniform(-0.99, 0.99));
        data.xs.push_back(1.0);
        std::sort(data.xs.begin(), data.xs.end());
        data.xs.erase(std::unique(data.xs.begin(), data.xs.end()), data.xs.end());
        for (std::size_t i = 0; i < data.xs.size(); ++i)
            data.ys.push_back(1.0 + static_cast<double>(rng.below(k)));
        const auto mu = build_feasible_class(data, k);
        const auto labels = data.class_labels();
        for (std::size_t i = 0; i < data.n(); ++i) {
            const auto f = measure_eval(mu, data.xs[i]);
            for (int l = 1; l <= k; ++l) {
                const double need = l == labels[i] ? 0.0 : 1.0;
                CHECK(f[labels[i] - 1] - f[l - 1] >= need - 1e-10);
            }
        }
    }
}

TEST_CASE("theorem 1 support inclusion on sparse generic instances") {
    Rng rng(808);
    int solved = 0;
    for (int trial = 0; trial < 30; ++trial) {
        // data from a sparse piecewise-linear ground truth: breakpoints at
        // a strict subset of the sample points
        const int n = 6 + static_cast<int>(rng.below(5));
        SortedDataset data;
        data.xs.push_back(-1.0);
        for (int i = 0; i < n - 2; ++i) data.xs.push_back(rng.uniform(-0.99, 0.99));
        data.xs.push_back(1.0);
        std::sort(data.xs.begin(), data.xs.end());
        data.xs.erase(std::unique(data.xs.begin(), data.xs.end()), data.xs.end());
        SortedDataset knots;
        knots.xs = {data.xs.front(), data.xs[data.xs.size() / 2], data.xs.back()};
        knots.ys = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const auto truth = build_feasible_reg(knots);
        for (double x : data.xs) data.ys.push_back(measure_eval_scalar(truth, x));

        const auto res = solve_reg_tv(data);
        if (!res.certificate.certified) continue;
        ++solved;
        const auto r = compute_r_reg(data);
        for (const auto& a : res.measure.atoms()) {
            if (std::abs(a.w[0]) <= 1e-8) continue;
            CHECK(r.contains_point(a.u.c, 1e-12));
        }
    }
    CHECK(solved >= 25);
}
