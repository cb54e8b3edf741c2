#include <doctest.h>

#include <cmath>

#include "binbias/binning.hpp"
#include "binbias/datagen.hpp"
#include "binbias/supports.hpp"

using namespace binbias;

TEST_CASE("triangle teacher shape") {
    const auto teacher = default_triangle_teacher();
    CHECK(teacher.measure.atoms().size() == 9);
    // normalization is the identity for this teacher: range is [0, 1]
    CHECK(teacher.y_lo == doctest::Approx(0.0));
    CHECK(teacher.y_span == doctest::Approx(1.0));
    CHECK(teacher.eval1d(-0.5) == doctest::Approx(1.0));
    CHECK(teacher.eval1d(0.5) == doctest::Approx(1.0));
    CHECK(teacher.eval1d(-1.0) == doctest::Approx(0.0));
    CHECK(teacher.eval1d(1.0) == doctest::Approx(0.0));
    CHECK(teacher.eval1d(0.0) == doctest::Approx(0.0));
    // small triangle peaks sit on the large slopes
    CHECK(teacher.eval1d(-0.1) == doctest::Approx(0.32));
    CHECK(teacher.eval1d(0.1) == doctest::Approx(0.32));
    double lo = 1e9, hi = -1e9;
    for (int g = 0; g <= 2000; ++g) {
        const double v = teacher.eval1d(-1.0 + 2.0 * g / 2000.0);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0 + 1e-12);
}

TEST_CASE("stratified sampling fills every bin exactly") {
    const auto teacher = default_triangle_teacher();
    const int n = 250, k = 50;
    const auto data = sample_stratified_1d(teacher, n, k, 17);
    CHECK(data.n() == n);
    CHECK(data.xs.front() == -1.0);
    CHECK(data.xs.back() == 1.0);
    for (std::size_t i = 1; i < data.n(); ++i) CHECK(data.xs[i] > data.xs[i - 1]);
    const auto bins = make_uniform_bins(k);
    std::vector<int> hist(k, 0);
    for (double y : data.ys) ++hist[encode(y, bins) - 1];
    for (int c : hist) CHECK(c == n / k);
    // labels are exact teacher outputs
    for (std::size_t i = 0; i < data.n(); ++i)
        CHECK(data.ys[i] == doctest::Approx(teacher.eval1d(data.xs[i])).epsilon(1e-12));
}

TEST_CASE("stratified sampling is deterministic given the seed") {
    const auto teacher = default_triangle_teacher();
    const auto a = sample_stratified_1d(teacher, 100, 10, 5);
    const auto b = sample_stratified_1d(teacher, 100, 10, 5);
    const auto c = sample_stratified_1d(teacher, 100, 10, 6);
    CHECK(a.xs == b.xs);
    CHECK(a.ys == b.ys);
    CHECK(a.xs != c.xs);
}

TEST_CASE("triangle data supports behave like the synthetic task") {
    const auto teacher = default_triangle_teacher();
    const int n = 250, k = 50;
    const auto data = sample_stratified_1d(teacher, n, k, 3);
    const auto r_reg = compute_r_reg(data);
    CHECK(r_reg.points.size() <= 20); // sparse: teacher has 9 kinks

    const auto bins = make_uniform_bins(k);
    SortedDataset binned{data.xs, {}};
    for (double y : data.ys) binned.ys.push_back(encode(y, bins));
    const auto r_class = compute_r_class(binned);
    CHECK(r_class.points.size() >= 0.8 * n);

    // |R_class| is nondecreasing in k on this dataset (empirical record)
    std::size_t prev = 0;
    for (int kk : {5, 10, 25, 50}) {
        const auto b2 = make_uniform_bins(kk);
        SortedDataset d2{data.xs, {}};
        for (double y : data.ys) d2.ys.push_back(encode(y, b2));
        const auto rc = compute_r_class(d2).points.size();
        CHECK(rc >= prev);
        prev = rc;
    }
}

TEST_CASE("n = k sampling with a monotone teacher") {
    TeacherSpec ramp;
    ramp.measure.add_atom({1, -1.0}, 0.5); // y = (x + 1) / 2
    ramp.y_lo = 0.0;
    ramp.y_span = 1.0;
    const auto data = sample_stratified_1d(ramp, 10, 10, 11);
    CHECK(data.n() == 10);
    const auto bins = make_uniform_bins(10);
    std::vector<int> hist(10, 0);
    for (double y : data.ys) ++hist[encode(y, bins) - 1];
    for (int c : hist) CHECK(c == 1);
}

TEST_CASE("degenerate teacher/k combinations are reported") {
    TeacherSpec flat;
    flat.measure.add_atom({1, -1.0}, 0.0);
    flat.y_lo = 0.0;
    flat.y_span = 0.0; // constant teacher, every label is 0
    CHECK_THROWS(sample_stratified_1d(flat, 10, 5, 1));
}

TEST_CASE("2-D grid sampling") {
    const auto teacher = random_network_teacher(3, 42);
    const auto grid = sample_grid_2d(teacher, 25, 25);
    CHECK(grid.inputs.rows == 625);
    CHECK(grid.inputs(0, 0) == -1.0);
    CHECK(grid.inputs(624, 1) == 1.0);
    double lo = 1e9, hi = -1e9;
    for (double y : grid.ys) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
    }
    CHECK(lo == doctest::Approx(0.0));
    CHECK(hi == doctest::Approx(1.0));

    const auto corners = sample_grid_2d(teacher, 2, 5);
    CHECK(corners.inputs.rows == 4);

    // zero teacher: every label equal
    TeacherSpec zero;
    zero.is_network = true;
    zero.network = make_mlp({2, 3, 1});
    const auto flat = sample_grid_2d(zero, 5, 5);
    for (double y : flat.ys) CHECK(y == flat.ys[0]);
}

TEST_CASE("teacher evaluation agrees with measure_eval and forward") {
    const auto teacher = default_triangle_teacher();
    for (int g = 0; g <= 100; ++g) {
        const double x = -1.0 + 2.0 * g / 100.0;
        const double direct =
            (measure_eval_scalar(teacher.measure, x) - teacher.y_lo) / teacher.y_span;
        CHECK(std::abs(teacher.eval1d(x) - direct) <= 1e-12);
    }
    const auto net = random_network_teacher(4, 9);
    Matrix in(1, 2);
    in(0, 0) = 0.3;
    in(0, 1) = -0.7;
    CHECK(net.eval2d_raw(0.3, -0.7) == doctest::Approx(forward(net.network, in)(0, 0)));
}
