#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dyadrisk {

// Dense row-major matrix of doubles. Everything in this pipeline is small
// (segments per session, speaker-sessions per fold), so a single flat
// container is enough.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {a_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return a_; }
    const std::vector<double>& data() const { return a_; }

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && a_ == o.a_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
double max_abs(const Matrix& m);
// max over rows of the sum of |entries| in the row
double norm_inf(const Matrix& m);

struct EigenResult {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column j pairs with values[j]
};

// Cyclic Jacobi rotations for a symmetric matrix. Converges when the
// off-diagonal Frobenius norm drops below off_tol (with a relative floor
// of 1e-15 * ||A||_F so large-magnitude inputs terminate too).
EigenResult jacobi_eigen(const Matrix& symmetric, double off_tol = 1e-10,
                         int max_sweeps = 100);

double offdiag_frobenius(const Matrix& m);

// Gaussian elimination with partial pivoting. Throws Error if singular.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);

}  // namespace dyadrisk
