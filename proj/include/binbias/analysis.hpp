#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "binbias/matrix.hpp"
#include "binbias/nn.hpp"

namespace binbias {

// Per-neuron kink summary of a trained two-layer 1-D model.
struct KinkReport {
    struct Neuron {
        int index = 0;
        int s = 0;
        double c = 0.0;
        double mass = 0.0; // ||a_j|| * ||b_j||
        bool dead = false;
        bool constant = false; // a_1 = 0, no kink
    };
    std::vector<Neuron> neurons;
    double max_mass = 0.0;

    std::vector<Neuron> live() const;
};

KinkReport extract_kinks(const Mlp& model, double mass_threshold_fraction = 1e-3);

struct CriticalLine {
    double a1 = 0.0, a2 = 0.0, a3 = 0.0; // a1 x1 + a2 x2 + a3 = 0
    bool crosses = false;                // intersects [-1, 1]^2
    double mass = 0.0;
};

// One line per live neuron of a two-layer model on (x1, x2, 1) inputs.
// Neurons with (a1, a2) = (0, 0) are constant features and are skipped.
std::vector<CriticalLine> critical_lines(const Mlp& model,
                                         double mass_threshold_fraction = 1e-3);

// Pairwise angles theta[t][t'] = arccos of the clamped normalized inner
// product. Zero-norm vectors produce NaN sentinels off the diagonal.
template <class Scalar>
Matrix gradient_angles(const std::vector<std::vector<Scalar>>& grads) {
    const std::size_t g = grads.size();
    std::vector<double> norms(g, 0.0);
    for (std::size_t t = 0; t < g; ++t) {
        double s = 0.0;
        for (Scalar v : grads[t]) s += static_cast<double>(v) * static_cast<double>(v);
        norms[t] = std::sqrt(s);
    }
    Matrix theta(g, g);
    for (std::size_t t = 0; t < g; ++t) {
        theta(t, t) = 0.0;
        for (std::size_t u = t + 1; u < g; ++u) {
            double angle;
            if (norms[t] == 0.0 || norms[u] == 0.0) {
                angle = std::nan("");
            } else {
                double dot = 0.0;
                const auto& a = grads[t];
                const auto& b = grads[u];
                for (std::size_t i = 0; i < a.size(); ++i)
                    dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
                const double cosv = std::clamp(dot / (norms[t] * norms[u]), -1.0, 1.0);
                angle = std::acos(cosv);
            }
            theta(t, u) = angle;
            theta(u, t) = angle;
        }
    }
    return theta;
}

// max pairwise angle without materializing the matrix
template <class Scalar>
double max_gradient_angle(const std::vector<std::vector<Scalar>>& grads) {
    const std::size_t g = grads.size();
    std::vector<double> norms(g, 0.0);
    for (std::size_t t = 0; t < g; ++t) {
        double s = 0.0;
        for (Scalar v : grads[t]) s += static_cast<double>(v) * static_cast<double>(v);
        norms[t] = std::sqrt(s);
    }
    double min_cos = 1.0;
    for (std::size_t t = 0; t < g; ++t) {
        if (norms[t] == 0.0) continue;
        for (std::size_t u = t + 1; u < g; ++u) {
            if (norms[u] == 0.0) continue;
            double dot = 0.0;
            const auto& a = grads[t];
            const auto& b = grads[u];
            for (std::size_t i = 0; i < a.size(); ++i)
                dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
            min_cos = std::min(min_cos, std::clamp(dot / (norms[t] * norms[u]), -1.0, 1.0));
        }
    }
    return std::acos(min_cos);
}

struct RmseStats {
    double best = 0.0;
    double worst = 0.0;
    double mean = 0.0;
    double stddev = 0.0; // sample, n-1 denominator; 0 with flag for n = 1
    bool single = false;
};

RmseStats rmse_stats(const std::vector<double>& rmses);

// Clusters of live kinks: sorted kinks split where the gap exceeds the
// radius; returned largest mass first, centers are mass-weighted means.
struct KinkCluster {
    double center = 0.0;
    double mass = 0.0;
    int count = 0;
};

std::vector<KinkCluster> cluster_kinks(const KinkReport& report, double radius);

// Number of distinct live crossing lines after single-linkage clustering
// with combined angular + offset distance.
int count_line_clusters(const std::vector<CriticalLine>& lines, double dist);

void write_kinks_csv(const std::string& path, const KinkReport& report);
void write_lines_csv(const std::string& path, const std::vector<CriticalLine>& lines);
// emits every stride-th row/column of the angle matrix
void write_angles_csv(const std::string& path, const Matrix& angles, int stride = 1);

} // namespace binbias
