#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fastsvd {

/// Dense real matrix, column-major storage (columns are contiguous).
///
/// Snapshot columns map directly onto matrix columns, so all streaming
/// code paths touch contiguous memory.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    double* col(std::size_t j) { return data_.data() + j * rows_; }
    const double* col(std::size_t j) const { return data_.data() + j * rows_; }
    std::span<const double> col_span(std::size_t j) const { return {col(j), rows_}; }
    std::span<double> col_span(std::size_t j) { return {col(j), rows_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void set_col(std::size_t j, std::span<const double> values);

    Matrix transpose() const;

    double frobenius_norm() const;
    double max_abs() const;
    bool all_finite() const;

    /// Throws std::invalid_argument if any entry is NaN or Inf.
    void require_finite(const std::string& what) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// y = A * x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
/// y = A^T * x
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);

/// max_ij |(M^T M - I)_ij|, the orthonormality defect of M's columns.
double orthonormality_error(const Matrix& m);

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases with the same number of columns.
double max_principal_angle(const Matrix& u1, const Matrix& u2);

struct SvdFactors {
    Matrix U;                   ///< left singular vectors, m x k, orthonormal columns
    std::vector<double> sigma;  ///< singular values, descending, nonnegative
    Matrix V;                   ///< right singular vectors, n x k, orthonormal columns
};

struct QrFactors {
    Matrix Q;  ///< rows x cols, orthonormal columns
    Matrix R;  ///< cols x cols, upper triangular, nonnegative diagonal
};

/// Thin Householder QR of a matrix with rows >= cols.
QrFactors householder_qr(const Matrix& m);

/// Full (non-truncated) SVD via one-sided Jacobi rotations.
///
/// Returns min(rows, cols) singular triplets; zero singular values get
/// orthonormal filler columns in U so the factor stays column-orthonormal.
/// Throws std::runtime_error if the sweep cap (60) is exceeded.
SvdFactors dense_svd(const Matrix& m);

/// Number of singular values strictly above eps * sigma[0]; at least 1.
std::size_t truncate_rank(std::span<const double> sigma, double eps);

}  // namespace fastsvd
