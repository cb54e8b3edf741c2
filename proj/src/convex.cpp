#include "binbias/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "binbias/rng.hpp"

namespace binbias {

namespace {

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// ---------------------------------------------------------------------
// Dense two-phase primal simplex with Bland's rule.
//
// Solves min c^T x s.t. A x = b, x >= 0. The tableau carries two cost
// rows so the phase-2 objective endures phase-1 pivoting. Artificial
// columns double as B^{-1}, which yields the dual multipliers for free.
// ---------------------------------------------------------------------
struct LpResult {
    std::vector<double> x;
    std::vector<double> duals; // pi with pi^T A <= c^T, pi^T b = objective
    double objective = 0.0;
    long pivots = 0;
    bool optimal = false;
};

class SimplexTableau {
  public:
    SimplexTableau(const Matrix& a, std::vector<double> b, const std::vector<double>& c)
        : m_(a.rows), n_(a.cols), width_(a.cols + a.rows + 1), costs_(c) {
        row_sign_.assign(m_, 1.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (b[i] < 0.0) {
                row_sign_[i] = -1.0;
                b[i] = -b[i];
            }
            b_max_ = std::max(b_max_, b[i]);
        }
        t_.assign((m_ + 2) * width_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            double* ti = row(i);
            const double* ai = a.row(i);
            for (std::size_t j = 0; j < n_; ++j) ti[j] = row_sign_[i] * ai[j];
            ti[n_ + i] = 1.0;
            ti[width_ - 1] = b[i];
        }
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) basis_[i] = n_ + i;
        // phase-1 reduced costs: artificials basic, cost 1 each
        double* p1 = row(m_);
        for (std::size_t j = 0; j < n_; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < m_; ++i) s += row(i)[j];
            p1[j] = -s;
        }
        double rhs = 0.0;
        for (std::size_t i = 0; i < m_; ++i) rhs += row(i)[width_ - 1];
        p1[width_ - 1] = -rhs;
        // phase-2 reduced costs: c_B = 0 while artificials are basic
        double* p2 = row(m_ + 1);
        for (std::size_t j = 0; j < n_; ++j) p2[j] = costs_[j];
    }

    LpResult solve(long pivot_cap) {
        LpResult res;
        long pivots = run_phase(m_, pivot_cap);
        if (pivots < 0) return res; // cap exceeded
        res.pivots = pivots;
        const double p1_obj = -row(m_)[width_ - 1];
        if (p1_obj > 1e-7 * (1.0 + b_max_))
            throw std::runtime_error("simplex: problem reported infeasible");
        drive_out_artificials();
        const long p2 = run_phase(m_ + 1, pivot_cap);
        if (p2 < 0) return res;
        res.pivots += p2;
        res.optimal = true;
        res.objective = -row(m_ + 1)[width_ - 1];
        res.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_) res.x[basis_[i]] = row(i)[width_ - 1];
        // duals: reduced cost of artificial i is -pi_i (its cost is 0)
        res.duals.assign(m_, 0.0);
        const double* p2row = row(m_ + 1);
        for (std::size_t i = 0; i < m_; ++i)
            res.duals[i] = -p2row[n_ + i] * row_sign_[i];
        return res;
    }

  private:
    double* row(std::size_t i) { return t_.data() + i * width_; }
    const double* row(std::size_t i) const { return t_.data() + i * width_; }

    // Bland: entering = lowest-index negative reduced cost; leaving =
    // lowest basis index among ratio-test ties. Returns pivot count, or
    // -1 when the cap is hit.
    long run_phase(std::size_t cost_row, long cap) {
        constexpr double tol = 1e-9;
        long pivots = 0;
        while (true) {
            const double* cr = row(cost_row);
            std::size_t enter = n_;
            for (std::size_t j = 0; j < n_; ++j) {
                if (cr[j] < -tol) {
                    enter = j;
                    break;
                }
            }
            if (enter == n_) return pivots;
            std::size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m_; ++i) {
                const double pivot = row(i)[enter];
                if (pivot > tol) {
                    const double ratio = row(i)[width_ - 1] / pivot;
                    if (ratio < best_ratio - 1e-12 ||
                        (ratio < best_ratio + 1e-12 &&
                         (leave == m_ || basis_[i] < basis_[leave]))) {
                        best_ratio = ratio;
                        leave = i;
                    }
                }
            }
            if (leave == m_)
                throw std::runtime_error("simplex: unbounded pivot column");
            pivot(leave, enter);
            if (++pivots > cap) return -1;
        }
    }

    void pivot(std::size_t r, std::size_t jc) {
        double* pr = row(r);
        const double inv = 1.0 / pr[jc];
        for (std::size_t j = 0; j < width_; ++j) pr[j] *= inv;
        pr[jc] = 1.0;
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r) continue;
            double* ti = row(i);
            const double f = ti[jc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < width_; ++j) ti[j] -= f * pr[j];
            ti[jc] = 0.0;
        }
        basis_[r] = jc;
    }

    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            for (std::size_t j = 0; j < n_; ++j) {
                if (std::abs(row(i)[j]) > 1e-9) {
                    pivot(i, j);
                    break;
                }
            }
            // a fully zero row is redundant; the artificial stays basic at 0
        }
    }

    std::size_t m_, n_, width_;
    std::vector<double> costs_;
    std::vector<double> t_;
    std::vector<double> row_sign_;
    std::vector<std::size_t> basis_;
    double b_max_ = 0.0;
};

// Householder QR least squares for small dense systems. Returns false
// when the matrix is rank deficient.
bool lstsq(Matrix m, std::vector<double> rhs, std::vector<double>& sol) {
    const std::size_t rows = m.rows, cols = m.cols;
    if (cols > rows) return false;
    for (std::size_t j = 0; j < cols; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < rows; ++i) norm += m(i, j) * m(i, j);
        norm = std::sqrt(norm);
        if (norm < 1e-12) return false;
        double alpha = m(j, j) > 0.0 ? -norm : norm;
        double vj = m(j, j) - alpha;
        std::vector<double> v(rows - j, 0.0);
        v[0] = vj;
        for (std::size_t i = j + 1; i < rows; ++i) v[i - j] = m(i, j);
        double vs = 0.0;
        for (double t : v) vs += t * t;
        if (vs < 1e-300) continue;
        for (std::size_t col = j; col < cols; ++col) {
            double dot = 0.0;
            for (std::size_t i = j; i < rows; ++i) dot += v[i - j] * m(i, col);
            const double f = 2.0 * dot / vs;
            for (std::size_t i = j; i < rows; ++i) m(i, col) -= f * v[i - j];
        }
        double dot = 0.0;
        for (std::size_t i = j; i < rows; ++i) dot += v[i - j] * rhs[i];
        const double f = 2.0 * dot / vs;
        for (std::size_t i = j; i < rows; ++i) rhs[i] -= f * v[i - j];
    }
    sol.assign(cols, 0.0);
    for (std::size_t j = cols; j-- > 0;) {
        double s = rhs[j];
        for (std::size_t l = j + 1; l < cols; ++l) s -= m(j, l) * sol[l];
        if (std::abs(m(j, j)) < 1e-12) return false;
        sol[j] = s / m(j, j);
    }
    return true;
}

} // namespace

FeatureDictionary FeatureDictionary::from_points(const std::vector<double>& xs) {
    FeatureDictionary dict;
    const std::size_t n = xs.size();
    dict.features.reserve(2 * n);
    for (double x : xs) dict.features.push_back({1, x});
    for (double x : xs) dict.features.push_back({-1, x});
    dict.phi = Matrix(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 2 * n; ++j)
            dict.phi(i, j) = feature_eval(dict.features[j], xs[i]);
    return dict;
}

std::vector<double> dual_field(const std::vector<std::vector<double>>& alphas,
                               const std::vector<double>& xs, const Feature& u) {
    if (alphas.size() != xs.size())
        throw std::invalid_argument("dual_field: alphas/xs length mismatch");
    if (alphas.empty()) return {};
    std::vector<double> field(alphas[0].size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double phi = feature_eval(u, xs[i]);
        if (phi == 0.0) continue;
        for (std::size_t c = 0; c < field.size(); ++c) field[c] += alphas[i][c] * phi;
    }
    return field;
}

double dual_norm_at(const std::vector<std::vector<double>>& alphas,
                    const std::vector<double>& xs, const Feature& u, NormKind norm) {
    const auto field = dual_field(alphas, xs, u);
    if (norm == NormKind::Absolute) {
        if (field.size() != 1)
            throw std::invalid_argument("dual_norm_at: absolute norm requires k = 1");
        return std::abs(field[0]);
    }
    return l2_norm(field);
}

DualCertificate check_dual_feasible(const std::vector<std::vector<double>>& alphas,
                                    const SortedDataset& data, NormKind norm) {
    DualCertificate cert;
    cert.alphas = alphas;
    double max_norm = 0.0;
    for (double c : data.xs) {
        max_norm = std::max(max_norm, dual_norm_at(alphas, data.xs, {1, c}, norm));
        max_norm = std::max(max_norm, dual_norm_at(alphas, data.xs, {-1, c}, norm));
    }
    cert.max_dual_norm = max_norm;
    cert.certified = max_norm <= 1.0 + 1e-8;
    return cert;
}

std::vector<std::vector<double>> extend_certificate(
    const std::vector<std::vector<double>>& sub_alphas,
    const std::vector<int>& subset_indices, std::size_t n, std::size_t k) {
    if (sub_alphas.size() != subset_indices.size())
        throw std::invalid_argument("extend_certificate: subset size mismatch");
    std::vector<std::vector<double>> out(n, std::vector<double>(k, 0.0));
    for (std::size_t p = 0; p < subset_indices.size(); ++p) {
        const int idx = subset_indices[p];
        if (idx < 1 || static_cast<std::size_t>(idx) > n)
            throw std::invalid_argument("extend_certificate: index outside [n]");
        if (sub_alphas[p].size() != k)
            throw std::invalid_argument("extend_certificate: alpha dimension mismatch");
        out[idx - 1] = sub_alphas[p];
    }
    return out;
}

SolveResult solve_reg_tv(const SortedDataset& data) {
    const std::size_t n = data.n();
    if (n < 2) throw std::invalid_argument("solve_reg_tv: need n >= 2");
    const auto dict = FeatureDictionary::from_points(data.xs);

    // split w = w+ - w-:  min 1^T (w+, w-)  s.t.  [Phi, -Phi] (w+, w-) = y
    Matrix a(n, 4 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 2 * n; ++j) {
            a(i, j) = dict.phi(i, j);
            a(i, j + 2 * n) = -dict.phi(i, j);
        }
    }
    const std::vector<double> costs(4 * n, 1.0);
    SimplexTableau tableau(a, data.ys, costs);
    const long cap = std::max<long>(1000, 10 * static_cast<long>(n) * static_cast<long>(n));
    const LpResult lp = tableau.solve(cap);
    if (!lp.optimal)
        throw std::runtime_error("solve_reg_tv: pivot cap exceeded");

    SolveResult out{AtomicMeasure(1), {}};
    for (std::size_t j = 0; j < 2 * n; ++j) {
        const double w = lp.x[j] - lp.x[j + 2 * n];
        if (w != 0.0) out.measure.add_atom(dict.features[j], w);
    }

    DualCertificate& cert = out.certificate;
    cert.alphas.resize(n);
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cert.alphas[i] = {-lp.duals[i]};
        dual_obj += -cert.alphas[i][0] * data.ys[i];
    }
    cert.objective = lp.objective;
    cert.dual_objective = dual_obj;
    cert.gap = cert.objective - cert.dual_objective;
    cert.iterations = lp.pivots;
    cert.max_dual_norm = check_dual_feasible(cert.alphas, data, NormKind::Absolute).max_dual_norm;
    cert.certified = std::abs(cert.gap) <= 1e-8 * (1.0 + std::abs(cert.objective)) &&
                     cert.max_dual_norm <= 1.0 + 1e-8;
    return out;
}

SolveResult solve_class_tv(const SortedDataset& data, int k, const PdhgOptions& opt) {
    const std::size_t n = data.n();
    if (n < 2) throw std::invalid_argument("solve_class_tv: need n >= 2");
    if (k < 2) throw std::invalid_argument("solve_class_tv: need k >= 2");
    const auto labels = data.class_labels();
    for (int y : labels)
        if (y > k) throw std::invalid_argument("solve_class_tv: label exceeds k");

    const auto dict = FeatureDictionary::from_points(data.xs);
    const std::size_t cols = 2 * n;
    const std::size_t kk = static_cast<std::size_t>(k);
    const std::size_t n_con = n * (kk - 1); // margin constraints, l != y_i

    // constraint (i, l): f_i[y_i] - f_i[l] >= 1, flattened over l != y_i
    Matrix f(n, kk);
    const auto apply_a = [&](const Matrix& w, std::vector<double>& v) {
        matmul(f, dict.phi, w);
        std::size_t c = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fy = f(i, labels[i] - 1);
            for (std::size_t l = 0; l < kk; ++l) {
                if (l == static_cast<std::size_t>(labels[i] - 1)) continue;
                v[c++] = fy - f(i, l);
            }
        }
    };
    Matrix alpha_mat(n, kk);
    const auto apply_at = [&](const std::vector<double>& v, Matrix& w) {
        alpha_mat.fill(0.0);
        std::size_t c = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double* ai = alpha_mat.row(i);
            const std::size_t yi = static_cast<std::size_t>(labels[i] - 1);
            for (std::size_t l = 0; l < kk; ++l) {
                if (l == yi) continue;
                const double lam = v[c++];
                ai[yi] += lam;
                ai[l] -= lam;
            }
        }
        matmul_at_b(w, dict.phi, alpha_mat);
    };

    // operator norm by power iteration on A^T A
    Rng rng(0x5eedULL);
    Matrix u(cols, kk);
    for (auto& x : u.data) x = rng.normal();
    {
        const double un = l2_norm(u.data);
        for (auto& x : u.data) x /= un;
    }
    std::vector<double> v(n_con, 0.0);
    Matrix u2(cols, kk);
    double op_norm_sq = 1.0;
    for (int it = 0; it < opt.power_iters; ++it) {
        apply_a(u, v);
        apply_at(v, u2);
        const double nrm = l2_norm(u2.data);
        if (nrm < 1e-300) break;
        op_norm_sq = nrm; // ||A^T A u|| with unit u -> lambda_max
        for (std::size_t i = 0; i < u.data.size(); ++i) u.data[i] = u2.data[i] / nrm;
    }
    const double op_norm = std::sqrt(op_norm_sq);
    const double step = 0.99 / std::max(op_norm, 1e-12);
    const double tau = step, sigma = step;

    Matrix w(cols, kk), w_bar(cols, kk), grad(cols, kk);
    std::vector<double> lambda(n_con, 0.0);
    std::vector<double> av(n_con, 0.0);

    DualCertificate cert;
    double primal = 0.0, dual = 0.0;
    long it = 0;
    bool converged = false;
    while (it < opt.max_iters) {
        ++it;
        apply_a(w_bar, av);
        for (std::size_t c = 0; c < n_con; ++c)
            lambda[c] = std::max(0.0, lambda[c] + sigma * (1.0 - av[c]));
        apply_at(lambda, grad);
        for (std::size_t j = 0; j < cols; ++j) {
            double* wj = w.row(j);
            const double* gj = grad.row(j);
            double* bj = w_bar.row(j);
            double sq = 0.0;
            for (std::size_t c = 0; c < kk; ++c) {
                bj[c] = wj[c] + tau * gj[c]; // pre-prox point, reuse w_bar as scratch
                sq += bj[c] * bj[c];
            }
            const double nrm = std::sqrt(sq);
            const double scale = nrm > tau ? 1.0 - tau / nrm : 0.0;
            for (std::size_t c = 0; c < kk; ++c) {
                const double nw = scale * bj[c];
                bj[c] = 2.0 * nw - wj[c];
                wj[c] = nw;
            }
        }
        if (it % opt.check_every == 0 || it == opt.max_iters) {
            apply_a(w, av);
            double viol = 0.0;
            for (double t : av) viol = std::max(viol, 1.0 - t);
            viol = std::max(viol, 0.0);
            primal = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                double sq = 0.0;
                const double* wj = w.row(j);
                for (std::size_t c = 0; c < kk; ++c) sq += wj[c] * wj[c];
                primal += std::sqrt(sq);
            }
            apply_at(lambda, grad);
            double max_row = 0.0;
            for (std::size_t j = 0; j < cols; ++j) {
                double sq = 0.0;
                const double* gj = grad.row(j);
                for (std::size_t c = 0; c < kk; ++c) sq += gj[c] * gj[c];
                max_row = std::max(max_row, std::sqrt(sq));
            }
            const double dscale = std::max(1.0, max_row);
            double lam_sum = 0.0;
            for (double t : lambda) lam_sum += t;
            dual = lam_sum / dscale;
            const double rel_gap = (primal - dual) / (1.0 + std::abs(primal));
            if (viol <= opt.feas_tol && rel_gap <= opt.gap_tol) {
                converged = true;
                break;
            }
        }
    }

    // certificate with the scaled (feasible) multipliers
    apply_at(lambda, grad);
    double max_row = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
        double sq = 0.0;
        const double* gj = grad.row(j);
        for (std::size_t c = 0; c < kk; ++c) sq += gj[c] * gj[c];
        max_row = std::max(max_row, std::sqrt(sq));
    }
    const double dscale = std::max(1.0, max_row);
    cert.alphas.assign(n, std::vector<double>(kk, 0.0));
    {
        std::size_t c = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t yi = static_cast<std::size_t>(labels[i] - 1);
            for (std::size_t l = 0; l < kk; ++l) {
                if (l == yi) continue;
                const double lam = lambda[c++] / dscale;
                cert.alphas[i][yi] -= lam;
                cert.alphas[i][l] += lam;
            }
        }
    }
    double lam_sum = 0.0;
    for (double t : lambda) lam_sum += t;
    cert.objective = primal;
    cert.dual_objective = lam_sum / dscale;
    cert.gap = cert.objective - cert.dual_objective;
    cert.iterations = it;
    cert.max_dual_norm =
        check_dual_feasible(cert.alphas, data, NormKind::Euclidean).max_dual_norm;
    cert.certified = converged;

    SolveResult out{AtomicMeasure(kk), std::move(cert)};
    for (std::size_t j = 0; j < cols; ++j) {
        const double* wj = w.row(j);
        bool nonzero = false;
        for (std::size_t c = 0; c < kk; ++c)
            if (wj[c] != 0.0) nonzero = true;
        if (nonzero)
            out.measure.add_atom(dict.features[j], std::vector<double>(wj, wj + kk));
    }
    return out;
}

double brute_force_reg_oracle(const SortedDataset& data, int max_n) {
    const std::size_t n = data.n();
    if (static_cast<int>(n) > max_n)
        throw std::invalid_argument("brute_force_reg_oracle: n too large");
    const auto dict = FeatureDictionary::from_points(data.xs);
    const std::size_t cols = 2 * n;

    double y_scale = 0.0;
    for (double y : data.ys) y_scale = std::max(y_scale, std::abs(y));
    const double res_tol = 1e-8 * (1.0 + y_scale);

    double best = std::numeric_limits<double>::infinity();
    // empty support: feasible iff y = 0
    if (y_scale == 0.0) return 0.0;

    std::vector<std::size_t> subset;
    std::vector<double> sol;
    // enumerate subsets of sizes 1..n via bitmask over 2n columns
    const std::size_t limit = std::size_t{1} << cols;
    for (std::size_t mask = 1; mask < limit; ++mask) {
        const int size = __builtin_popcountll(mask);
        if (size > static_cast<int>(n)) continue;
        subset.clear();
        for (std::size_t j = 0; j < cols; ++j)
            if (mask & (std::size_t{1} << j)) subset.push_back(j);
        Matrix m(n, subset.size());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < subset.size(); ++j)
                m(i, j) = dict.phi(i, subset[j]);
        if (!lstsq(m, data.ys, sol)) continue;
        // consistency of the least-squares solution
        double max_res = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double fit = 0.0;
            for (std::size_t j = 0; j < subset.size(); ++j)
                fit += dict.phi(i, subset[j]) * sol[j];
            max_res = std::max(max_res, std::abs(fit - data.ys[i]));
        }
        if (max_res > res_tol) continue;
        double l1 = 0.0;
        for (double wv : sol) l1 += std::abs(wv);
        best = std::min(best, l1);
    }
    if (!std::isfinite(best))
        throw std::runtime_error("brute_force_reg_oracle: no consistent subset found");
    return best;
}

} // namespace binbias
