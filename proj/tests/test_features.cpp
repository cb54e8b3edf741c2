#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "binbias/features.hpp"
#include "binbias/rng.hpp"

using namespace binbias;

TEST_CASE("feature_eval ramps") {
    CHECK(feature_eval({1, -0.5}, 0.0) == doctest::Approx(0.5));
    CHECK(feature_eval({-1, 0.5}, 1.0) == 0.0);
    CHECK(feature_eval({1, 0.0}, -1.0) == 0.0);
    // leftward feature grows away from its kink
    CHECK(feature_eval({-1, 0.5}, -0.5) == doctest::Approx(1.0));
}

TEST_CASE("measure_eval on hand-built atoms") {
    AtomicMeasure mu(1);
    mu.add_atom({1, -1.0}, 1.0);
    mu.add_atom({1, 0.0}, -2.0);
    CHECK(measure_eval(mu, 0.0)[0] == doctest::Approx(1.0));
    CHECK(measure_eval_scalar(mu, 1.0) == doctest::Approx(2.0 - 2.0));

    AtomicMeasure empty(3);
    const auto z = measure_eval(empty, 0.7);
    CHECK(z.size() == 3);
    for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("measure_eval is positively homogeneous") {
    Rng rng(11);
    AtomicMeasure mu(2);
    for (int i = 0; i < 8; ++i)
        mu.add_atom({rng.uniform() < 0.5 ? 1 : -1, rng.uniform(-1.0, 1.0)},
                    {rng.normal(), rng.normal()});
    for (double t : {-2.5, 0.0, 0.3, 4.0}) {
        const auto scaled = mu.scaled(t);
        for (double x : {-0.9, 0.1, 0.77}) {
            const auto a = measure_eval(mu, x);
            const auto b = measure_eval(scaled, x);
            for (std::size_t c = 0; c < a.size(); ++c)
                CHECK(b[c] == doctest::Approx(t * a[c]).epsilon(1e-12));
        }
    }
}

TEST_CASE("atoms with identical features merge") {
    AtomicMeasure mu(1);
    mu.add_atom({1, 0.25}, 2.0);
    mu.add_atom({1, 0.25}, 3.0);
    mu.add_atom({-1, 0.25}, 1.0); // different sign, no merge
    CHECK(mu.atoms().size() == 2);
    CHECK(mu.atoms()[0].w[0] == doctest::Approx(5.0));
}

TEST_CASE("reparameterize maps rows to kink atoms") {
    RawNetworkLayer layer;
    layer.input_weights = {{2.0, 1.0}, {-1.0, 0.5}, {0.5, 0.0}};
    layer.output_weights = {{3.0}, {1.0}, {4.0}};
    const auto rep = reparameterize(layer);
    REQUIRE(rep.measure.atoms().size() == 3);
    // rightward block first, sorted by kink
    const auto& atoms = rep.measure.atoms();
    CHECK(atoms[0].u.s == 1);
    CHECK(atoms[0].u.c == doctest::Approx(-0.5));
    CHECK(atoms[0].w[0] == doctest::Approx(6.0));
    CHECK(atoms[1].u.s == 1);
    CHECK(atoms[1].u.c == doctest::Approx(0.0));
    CHECK(atoms[1].w[0] == doctest::Approx(2.0));
    CHECK(atoms[2].u.s == -1);
    CHECK(atoms[2].u.c == doctest::Approx(0.5));
    CHECK(atoms[2].w[0] == doctest::Approx(1.0));
    CHECK(rep.constant_offset[0] == 0.0);
}

TEST_CASE("reparameterize routes a1 = 0 rows to the constant offset") {
    RawNetworkLayer layer;
    layer.input_weights = {{0.0, 0.7}, {0.0, -0.3}};
    layer.output_weights = {{2.0}, {5.0}};
    const auto rep = reparameterize(layer);
    CHECK(rep.measure.empty());
    CHECK(rep.constant_offset[0] == doctest::Approx(1.4)); // (0.7)_+ * 2, (-0.3)_+ = 0
}

TEST_CASE("round trip: raw network equals its measure on a dense grid") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        RawNetworkLayer layer;
        const int m = 1 + static_cast<int>(rng.below(12));
        for (int j = 0; j < m; ++j) {
            double a1 = 0.0;
            while (std::abs(a1) < 1e-3) a1 = rng.normal();
            layer.input_weights.push_back({a1, rng.normal()});
            layer.output_weights.push_back({rng.normal(), rng.normal()});
        }
        const auto rep = reparameterize(layer);
        for (int g = 0; g <= 200; ++g) {
            const double x = -2.0 + 4.0 * g / 200.0;
            const auto raw = layer.eval(x);
            const auto fit = measure_eval(rep.measure, x);
            for (std::size_t c = 0; c < raw.size(); ++c)
                CHECK(std::abs(raw[c] - (fit[c] + rep.constant_offset[c])) <= 1e-10);
        }
    }
}

TEST_CASE("piecewise linearity between consecutive kinks") {
    Rng rng(7);
    AtomicMeasure mu(1);
    std::vector<double> kinks;
    for (int i = 0; i < 6; ++i) {
        const double c = rng.uniform(-1.0, 1.0);
        kinks.push_back(c);
        mu.add_atom({rng.uniform() < 0.5 ? 1 : -1, c}, rng.normal());
    }
    std::sort(kinks.begin(), kinks.end());
    for (std::size_t seg = 0; seg + 1 < kinks.size(); ++seg) {
        if (kinks[seg + 1] - kinks[seg] < 1e-6) continue;
        for (int rep = 0; rep < 5; ++rep) {
            double t0 = rng.uniform(kinks[seg], kinks[seg + 1]);
            double t1 = rng.uniform(kinks[seg], kinks[seg + 1]);
            double t2 = rng.uniform(kinks[seg], kinks[seg + 1]);
            const double f0 = measure_eval_scalar(mu, t0);
            const double f1 = measure_eval_scalar(mu, t1);
            const double f2 = measure_eval_scalar(mu, t2);
            // three points on one segment are collinear
            const double det = (t1 - t0) * (f2 - f0) - (t2 - t0) * (f1 - f0);
            CHECK(std::abs(det) <= 1e-9);
        }
    }
}

TEST_CASE("total_variation") {
    AtomicMeasure mu(1);
    mu.add_atom({1, -1.0}, 1.0);
    mu.add_atom({1, 0.0}, -2.0);
    CHECK(total_variation(mu, NormKind::Absolute) == doctest::Approx(3.0));
    CHECK(total_variation(mu, NormKind::Euclidean) == doctest::Approx(3.0));

    AtomicMeasure empty(1);
    CHECK(total_variation(empty, NormKind::Absolute) == 0.0);

    AtomicMeasure vec(2);
    vec.add_atom({1, 0.0}, {3.0, 4.0});
    CHECK(total_variation(vec, NormKind::Euclidean) == doctest::Approx(5.0));
    CHECK_THROWS(total_variation(vec, NormKind::Absolute));
}

TEST_CASE("measure JSON round trip") {
    AtomicMeasure mu(2);
    mu.add_atom({1, -0.25}, {1.5, -2.0});
    mu.add_atom({-1, 0.75}, {0.0, 0.125});
    const auto text = mu.to_json();
    const auto back = AtomicMeasure::from_json(text);
    REQUIRE(back.k() == 2);
    REQUIRE(back.atoms().size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.atoms()[i].u.s == mu.atoms()[i].u.s);
        CHECK(back.atoms()[i].u.c == mu.atoms()[i].u.c);
        CHECK(back.atoms()[i].w == mu.atoms()[i].w);
    }
}
