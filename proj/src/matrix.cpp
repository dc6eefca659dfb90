#include "fastsvd/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fastsvd {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("Matrix: rows and cols must be >= 1");
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
        throw std::invalid_argument("Matrix: rows and cols must be >= 1");
    }
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("Matrix: data length does not match rows*cols");
    }
    require_finite("Matrix constructor");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

void Matrix::set_col(std::size_t j, std::span<const double> values) {
    if (values.size() != rows_) {
        throw std::invalid_argument("Matrix::set_col: length mismatch");
    }
    std::copy(values.begin(), values.end(), col(j));
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
}

double Matrix::frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

double Matrix::max_abs() const {
    double s = 0.0;
    for (double v : data_) s = std::max(s, std::fabs(v));
    return s;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::require_finite(const std::string& what) const {
    if (!all_finite()) {
        throw std::invalid_argument(what + ": non-finite entry");
    }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    for (std::size_t j = 0; j < n; ++j) {
        double* cj = c.col(j);
        for (std::size_t l = 0; l < k; ++l) {
            const double blj = b(l, j);
            if (blj == 0.0) continue;
            const double* al = a.col(l);
            for (std::size_t i = 0; i < m; ++i) cj[i] += al[i] * blj;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: row counts differ");
    Matrix c(a.cols(), b.cols());
    const std::size_t m = a.rows();
    for (std::size_t j = 0; j < b.cols(); ++j) {
        const double* bj = b.col(j);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double* ai = a.col(i);
            double s = 0.0;
            for (std::size_t l = 0; l < m; ++l) s += ai[l] * bj[l];
            c(i, j) = s;
        }
    }
    return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) throw std::invalid_argument("matvec: dimension mismatch");
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const double* aj = a.col(j);
        for (std::size_t i = 0; i < a.rows(); ++i) y[i] += aj[i] * xj;
    }
    return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.rows()) throw std::invalid_argument("matvec_t: dimension mismatch");
    std::vector<double> y(a.cols(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double* aj = a.col(j);
        double s = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) s += aj[i] * x[i];
        y[j] = s;
    }
    return y;
}

double orthonormality_error(const Matrix& m) {
    double worst = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        for (std::size_t i = 0; i <= j; ++i) {
            const double* ci = m.col(i);
            const double* cj = m.col(j);
            double s = 0.0;
            for (std::size_t l = 0; l < m.rows(); ++l) s += ci[l] * cj[l];
            const double target = (i == j) ? 1.0 : 0.0;
            worst = std::max(worst, std::fabs(s - target));
        }
    }
    return worst;
}

double max_principal_angle(const Matrix& u1, const Matrix& u2) {
    if (u1.rows() != u2.rows() || u1.cols() != u2.cols()) {
        throw std::invalid_argument("max_principal_angle: shape mismatch");
    }
    const Matrix overlap = matmul_tn(u1, u2);
    SvdFactors f = dense_svd(overlap);
    // Smallest cosine gives the largest angle.
    double c = f.sigma.back();
    c = std::clamp(c, -1.0, 1.0);
    return std::acos(c);
}

QrFactors householder_qr(const Matrix& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    if (rows < cols) throw std::invalid_argument("householder_qr: requires rows >= cols");
    m.require_finite("householder_qr");

    Matrix work = m;
    // Householder vectors, one per column (stored dense for simplicity).
    Matrix vs(rows, cols);
    std::vector<double> betas(cols, 0.0);

    for (std::size_t j = 0; j < cols; ++j) {
        double normx = 0.0;
        for (std::size_t i = j; i < rows; ++i) normx += work(i, j) * work(i, j);
        normx = std::sqrt(normx);
        if (normx == 0.0) continue;  // zero column: no reflector

        const double x0 = work(j, j);
        const double alpha = (x0 >= 0.0) ? -normx : normx;
        double vnorm2 = 0.0;
        vs(j, j) = x0 - alpha;
        vnorm2 += vs(j, j) * vs(j, j);
        for (std::size_t i = j + 1; i < rows; ++i) {
            vs(i, j) = work(i, j);
            vnorm2 += vs(i, j) * vs(i, j);
        }
        if (vnorm2 == 0.0) continue;
        betas[j] = 2.0 / vnorm2;

        // Apply reflector to the remaining columns of the work matrix.
        for (std::size_t c = j; c < cols; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < rows; ++i) dot += vs(i, j) * work(i, c);
            const double f = betas[j] * dot;
            for (std::size_t i = j; i < rows; ++i) work(i, c) -= f * vs(i, j);
        }
    }

    // R is the upper triangle of the transformed matrix, exact zeros below.
    Matrix R(cols, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i <= j; ++i) R(i, j) = work(i, j);

    // Q = H_0 ... H_{cols-1} applied to the thin identity.
    Matrix Q(rows, cols);
    for (std::size_t j = 0; j < cols; ++j) Q(j, j) = 1.0;
    for (std::size_t j = cols; j-- > 0;) {
        if (betas[j] == 0.0) continue;
        for (std::size_t c = 0; c < cols; ++c) {
            double dot = 0.0;
            for (std::size_t i = j; i < rows; ++i) dot += vs(i, j) * Q(i, c);
            const double f = betas[j] * dot;
            for (std::size_t i = j; i < rows; ++i) Q(i, c) -= f * vs(i, j);
        }
    }

    // Sign convention: nonnegative diagonal of R.
    for (std::size_t j = 0; j < cols; ++j) {
        if (R(j, j) < 0.0) {
            for (std::size_t c = j; c < cols; ++c) R(j, c) = -R(j, c);
            for (std::size_t i = 0; i < rows; ++i) Q(i, j) = -Q(i, j);
        }
    }
    return {std::move(Q), std::move(R)};
}

namespace {

// One-sided Jacobi on the columns of `work` (rows >= cols assumed profitable
// but not required). Rotations accumulate into `v` (cols x cols).
void jacobi_sweeps(Matrix& work, Matrix& v) {
    constexpr int kMaxSweeps = 60;
    constexpr double kRelTol = 1e-14;
    const std::size_t n = work.cols();
    const std::size_t m = work.rows();

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double* cp = work.col(p);
                double* cq = work.col(q);
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    alpha += cp[i] * cp[i];
                    beta += cq[i] * cq[i];
                    gamma += cp[i] * cq[i];
                }
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::fabs(gamma) <= kRelTol * std::sqrt(alpha * beta)) continue;
                converged = false;

                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = ((zeta >= 0.0) ? 1.0 : -1.0) /
                                 (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = cp[i], wq = cq[i];
                    cp[i] = c * wp - s * wq;
                    cq[i] = s * wp + c * wq;
                }
                double* vp = v.col(p);
                double* vq = v.col(q);
                for (std::size_t i = 0; i < n; ++i) {
                    const double wp = vp[i], wq = vq[i];
                    vp[i] = c * wp - s * wq;
                    vq[i] = s * wp + c * wq;
                }
            }
        }
        if (converged) return;
    }
    throw std::runtime_error("dense_svd: Jacobi sweeps did not converge within 60 iterations");
}

// Orthonormal filler for numerically zero singular directions: pick unit
// vectors and orthogonalize against the columns already placed in u.
void complete_basis(Matrix& u, std::size_t from_col) {
    const std::size_t m = u.rows();
    std::size_t candidate = 0;
    for (std::size_t j = from_col; j < u.cols(); ++j) {
        while (true) {
            if (candidate >= m) {
                throw std::runtime_error("dense_svd: failed to complete orthonormal basis");
            }
            std::vector<double> e(m, 0.0);
            e[candidate++] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t c = 0; c < j; ++c) {
                    const double* uc = u.col(c);
                    double dot = 0.0;
                    for (std::size_t i = 0; i < m; ++i) dot += uc[i] * e[i];
                    for (std::size_t i = 0; i < m; ++i) e[i] -= dot * uc[i];
                }
            }
            double norm = 0.0;
            for (double x : e) norm += x * x;
            norm = std::sqrt(norm);
            if (norm > 1e-8) {
                for (std::size_t i = 0; i < m; ++i) u(i, j) = e[i] / norm;
                break;
            }
        }
    }
}

}  // namespace

SvdFactors dense_svd(const Matrix& m) {
    m.require_finite("dense_svd");
    if (m.rows() < m.cols()) {
        SvdFactors f = dense_svd(m.transpose());
        std::swap(f.U, f.V);
        return f;
    }

    Matrix work = m;
    Matrix v = Matrix::identity(m.cols());
    jacobi_sweeps(work, v);

    const std::size_t n = m.cols();
    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        const double* cj = work.col(j);
        for (std::size_t i = 0; i < m.rows(); ++i) s += cj[i] * cj[i];
        norms[j] = std::sqrt(s);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

    SvdFactors f;
    f.sigma.resize(n);
    f.U = Matrix(m.rows(), n);
    f.V = Matrix(n, n);
    const double sigma_max = norms.empty() ? 0.0 : norms[order[0]];
    const double zero_tol = sigma_max * static_cast<double>(m.rows()) * 1e-15;

    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        f.sigma[j] = norms[src];
        for (std::size_t i = 0; i < n; ++i) f.V(i, j) = v(i, src);
        if (norms[src] > zero_tol && norms[src] > 0.0) {
            const double inv = 1.0 / norms[src];
            const double* cj = work.col(src);
            for (std::size_t i = 0; i < m.rows(); ++i) f.U(i, j) = cj[i] * inv;
            ++nonzero;
        }
    }
    if (nonzero < n) complete_basis(f.U, nonzero);
    return f;
}

std::size_t truncate_rank(std::span<const double> sigma, double eps) {
    if (sigma.empty()) throw std::invalid_argument("truncate_rank: empty spectrum");
    if (!(eps > 0.0)) throw std::invalid_argument("truncate_rank: eps must be > 0");
    const double threshold = eps * sigma[0];
    std::size_t k = 0;
    for (double s : sigma) {
        if (s > threshold) ++k;
    }
    return std::max<std::size_t>(k, 1);
}

}  // namespace fastsvd
