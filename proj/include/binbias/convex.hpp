#pragma once

#include <cstddef>
#include <vector>

#include "binbias/features.hpp"
#include "binbias/matrix.hpp"
#include "binbias/supports.hpp"

namespace binbias {

// The finite dictionary U_X of both-direction ramps with kinks at the
// data points, plus its design matrix. Column order: rightward features
// sorted by kink first, then leftward.
struct FeatureDictionary {
    std::vector<Feature> features; // size 2n
    Matrix phi;                    // n x 2n, phi(i, j) = phi_{u_j}(x_i)

    static FeatureDictionary from_points(const std::vector<double>& xs);
};

// Dual variables alpha_1..alpha_n with feasibility and gap diagnostics.
// Sign convention follows the dual problem sup -sum_i sigma_{S_i}(alpha_i)
// subject to the dual norm of sum_i alpha_i phi_u(x_i) being <= 1 on U.
struct DualCertificate {
    std::vector<std::vector<double>> alphas; // n vectors in R^k
    double max_dual_norm = 0.0;              // max over U_X (exact max over U)
    double objective = 0.0;                  // primal total variation
    double dual_objective = 0.0;
    double gap = 0.0;                        // objective - dual_objective
    bool certified = false;
    long iterations = 0;
};

struct SolveResult {
    AtomicMeasure measure;
    DualCertificate certificate;
};

// sum_i alpha_i phi_u(x_i) as a vector in R^k.
std::vector<double> dual_field(const std::vector<std::vector<double>>& alphas,
                               const std::vector<double>& xs, const Feature& u);

// Dual norm of the field at u (|.| for k = 1, Euclidean otherwise).
double dual_norm_at(const std::vector<std::vector<double>>& alphas,
                    const std::vector<double>& xs, const Feature& u, NormKind norm);

// Evaluates the dual field at every kink in both directions and records
// the maximum dual norm. The field is piecewise affine in the kink, so
// this maximum equals the maximum over all of U.
DualCertificate check_dual_feasible(const std::vector<std::vector<double>>& alphas,
                                    const SortedDataset& data, NormKind norm);

// Zero-padded extension of a certificate on a subset of samples (1-based
// indices into [n]) to all n samples.
std::vector<std::vector<double>> extend_certificate(
    const std::vector<std::vector<double>>& sub_alphas,
    const std::vector<int>& subset_indices, std::size_t n, std::size_t k);

// Minimum total variation interpolation over U_X: min sum |w| subject to
// Phi w = y, solved exactly as a linear program by two-phase simplex with
// Bland's rule. The certificate's dual variables come from the optimal
// basis.
SolveResult solve_reg_tv(const SortedDataset& data);

struct PdhgOptions {
    long max_iters = 2000000;
    long check_every = 100;
    double feas_tol = 1e-7;
    double gap_tol = 1e-6;
    int power_iters = 50;
};

// Minimum group total variation subject to the n(k-1) classification
// margin constraints, solved by a primal-dual splitting: per-row vector
// soft thresholding against projected nonnegative multipliers. On hitting
// the iteration cap the best iterate is returned with certified = false.
SolveResult solve_class_tv(const SortedDataset& data, int k, const PdhgOptions& opt = {});

// Independent test oracle: enumerates every full-column-rank subset of
// dictionary columns (sizes 0..n), solves Phi_S w = y by Householder
// least squares, and returns the minimal l1 norm among consistent
// solutions. Only valid for n <= max_n.
double brute_force_reg_oracle(const SortedDataset& data, int max_n = 6);

} // namespace binbias
