#pragma once

#include <cstdint>

#include "binbias/features.hpp"
#include "binbias/nn.hpp"
#include "binbias/supports.hpp"

namespace binbias {

// Synthetic target function: either a 1-D atomic measure or a small
// random two-layer network on (x1, x2, 1) inputs. Outputs are min-max
// normalized onto [0, 1].
struct TeacherSpec {
    AtomicMeasure measure{1};
    bool is_network = false;
    Mlp network;
    double y_lo = 0.0;
    double y_span = 1.0;

    double eval1d(double x) const;         // normalized, 1-D branch
    double eval2d_raw(double x1, double x2) const; // unnormalized, network branch
};

// The fixed 1-D target: two large triangles peaking at -0.5 and +0.5
// (base width 1, height 1) plus two small triangles peaking at -0.1 and
// +0.1 (base width 0.2, height 0.12), realized by 9 rightward atoms.
// The graph already spans [0, 1] so the min-max normalization is the
// identity for this teacher.
TeacherSpec default_triangle_teacher();

// 3-input/1-output two-layer teacher with He-initialized weights.
TeacherSpec random_network_teacher(int hidden, std::uint64_t seed);

// Stratified sampler: draws x uniformly on [-1, 1], keeping a draw only
// while its label bin still has quota n/k, until every bin is full. The
// domain endpoints x = -1 and x = 1 are always included (counted toward
// their own bins). Requires k | n.
SortedDataset sample_stratified_1d(const TeacherSpec& teacher, int n, int k,
                                   std::uint64_t seed);

struct GridDataset2d {
    Matrix inputs;           // side*side x 2, third coordinate fixed to 1
    std::vector<double> ys;  // normalized to [0, 1]
    int side = 0;
    double y_lo = 0.0;       // raw-label normalization record
    double y_span = 1.0;
};

// Evenly spaced grid over [-1, 1]^2 labelled by the network teacher.
GridDataset2d sample_grid_2d(const TeacherSpec& teacher, int side, int k);

} // namespace binbias
