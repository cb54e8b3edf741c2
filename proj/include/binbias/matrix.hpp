#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace binbias {

// Minimal dense row-major matrix. The multiply kernels keep the column
// index innermost so the compiler can vectorize without reassociating
// floating-point sums (results stay deterministic).
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

// C = A * B, shapes (r x k)(k x c) -> (r x c)
inline void matmul(Matrix& c, const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols)
        throw std::invalid_argument("matmul: shape mismatch");
    c.fill(0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t l = 0; l < a.cols; ++l) {
            const double s = ai[l];
            const double* bl = b.row(l);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += s * bl[j];
        }
    }
}

// C = A^T * B, shapes (k x r)(k x c) -> (r x c)
inline void matmul_at_b(Matrix& c, const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols)
        throw std::invalid_argument("matmul_at_b: shape mismatch");
    c.fill(0.0);
    for (std::size_t l = 0; l < a.rows; ++l) {
        const double* al = a.row(l);
        const double* bl = b.row(l);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double s = al[i];
            double* ci = c.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) ci[j] += s * bl[j];
        }
    }
}

inline Matrix transposed(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
    return t;
}

} // namespace binbias
