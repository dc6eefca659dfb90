#include "fastsvd/svd_stream.hpp"

#include <cmath>
#include <stdexcept>

namespace fastsvd {

namespace {

constexpr double kResidualSkipTol = 1e-13;  // relative Frobenius threshold
constexpr double kOrthoTol = 1e-10;

// Orthogonalize the columns of q against the basis and against each other
// (two MGS passes). Columns that vanish numerically are replaced by unit
// vector filler so [basis q] stays orthonormal; their rows in R carry no
// weight, so the filler never reaches the retained spectrum.
void clean_residual_q(const Matrix& basis, Matrix& q) {
    const std::size_t m = q.rows();
    std::size_t candidate = 0;
    for (std::size_t j = 0; j < q.cols(); ++j) {
        double norm = 0.0;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t c = 0; c < basis.cols(); ++c) {
                const double* bc = basis.col(c);
                double dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += bc[i] * q(i, j);
                for (std::size_t i = 0; i < m; ++i) q(i, j) -= dot * bc[i];
            }
            for (std::size_t c = 0; c < j; ++c) {
                const double* qc = q.col(c);
                double dot = 0.0;
                for (std::size_t i = 0; i < m; ++i) dot += qc[i] * q(i, j);
                for (std::size_t i = 0; i < m; ++i) q(i, j) -= dot * qc[i];
            }
            norm = 0.0;
            for (std::size_t i = 0; i < m; ++i) norm += q(i, j) * q(i, j);
            norm = std::sqrt(norm);
            if (norm < 1e-8 && pass == 1) break;
        }
        if (norm >= 1e-8) {
            for (std::size_t i = 0; i < m; ++i) q(i, j) /= norm;
            continue;
        }
        // Vanished direction: deterministic filler.
        bool placed = false;
        while (candidate < m && !placed) {
            for (std::size_t i = 0; i < m; ++i) q(i, j) = 0.0;
            q(candidate++, j) = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t c = 0; c < basis.cols(); ++c) {
                    const double* bc = basis.col(c);
                    double dot = 0.0;
                    for (std::size_t i = 0; i < m; ++i) dot += bc[i] * q(i, j);
                    for (std::size_t i = 0; i < m; ++i) q(i, j) -= dot * bc[i];
                }
                for (std::size_t c = 0; c < j; ++c) {
                    const double* qc = q.col(c);
                    double dot = 0.0;
                    for (std::size_t i = 0; i < m; ++i) dot += qc[i] * q(i, j);
                    for (std::size_t i = 0; i < m; ++i) q(i, j) -= dot * qc[i];
                }
            }
            norm = 0.0;
            for (std::size_t i = 0; i < m; ++i) norm += q(i, j) * q(i, j);
            norm = std::sqrt(norm);
            if (norm > 1e-4) {
                for (std::size_t i = 0; i < m; ++i) q(i, j) /= norm;
                placed = true;
            }
        }
        if (!placed) {
            throw std::runtime_error("StreamingSvd: could not build residual basis filler");
        }
    }
}

}  // namespace

StreamingSvd::StreamingSvd(const Matrix& first_block, double eps, StreamingSvdOptions options)
    : eps_(eps) {
    if (first_block.empty()) throw std::invalid_argument("StreamingSvd: empty first block");
    if (!(eps > 0.0)) throw std::invalid_argument("StreamingSvd: eps must be > 0");
    first_block.require_finite("StreamingSvd first block");

    SvdFactors f = dense_svd(first_block);
    const std::size_t k = truncate_rank(f.sigma, eps_);

    basis_ = Matrix(first_block.rows(), k);
    sigma_.assign(f.sigma.begin(), f.sigma.begin() + static_cast<std::ptrdiff_t>(k));
    for (std::size_t j = 0; j < k; ++j) basis_.set_col(j, f.U.col_span(j));

    if (options.track_v) {
        Matrix v(first_block.cols(), k);
        for (std::size_t j = 0; j < k; ++j) v.set_col(j, f.V.col_span(j));
        right_ = std::move(v);
    }
    cols_seen_ = first_block.cols();
    record();
}

void StreamingSvd::update(const Matrix& block) {
    if (block.rows() != basis_.rows()) {
        throw std::invalid_argument("StreamingSvd::update: row count mismatch");
    }
    block.require_finite("StreamingSvd::update block");

    const std::size_t k = rank();
    const std::size_t s = block.cols();

    // Coefficients of the block in the current basis and the residual.
    Matrix coef = matmul_tn(basis_, block);  // k x s
    Matrix resid = block;
    for (std::size_t j = 0; j < s; ++j) {
        double* rj = resid.col(j);
        for (std::size_t c = 0; c < k; ++c) {
            const double f = coef(c, j);
            if (f == 0.0) continue;
            const double* bc = basis_.col(c);
            for (std::size_t i = 0; i < resid.rows(); ++i) rj[i] -= f * bc[i];
        }
    }

    const double block_norm = block.frobenius_norm();
    const double resid_norm = resid.frobenius_norm();
    const bool in_span = resid_norm <= kResidualSkipTol * block_norm;

    if (in_span) {
        // Residual numerically zero: the spectrum update needs no new
        // directions, so the core matrix is [Sigma coef] without a Q block.
        Matrix core(k, k + s);
        for (std::size_t i = 0; i < k; ++i) core(i, i) = sigma_[i];
        for (std::size_t j = 0; j < s; ++j)
            for (std::size_t i = 0; i < k; ++i) core(i, k + j) = coef(i, j);
        truncate_and_store(dense_svd(core), basis_, s);
    } else {
        QrFactors qr = householder_qr(resid);
        // Householder filler columns of a rank-deficient residual are not
        // orthogonal to the basis; scrub them so [U Q] is orthonormal.
        clean_residual_q(basis_, qr.Q);

        Matrix core(k + s, k + s);
        for (std::size_t i = 0; i < k; ++i) core(i, i) = sigma_[i];
        for (std::size_t j = 0; j < s; ++j) {
            for (std::size_t i = 0; i < k; ++i) core(i, k + j) = coef(i, j);
            for (std::size_t i = 0; i <= j; ++i) core(k + i, k + j) = qr.R(i, j);
        }

        Matrix stack(basis_.rows(), k + s);
        for (std::size_t j = 0; j < k; ++j) stack.set_col(j, basis_.col_span(j));
        for (std::size_t j = 0; j < s; ++j) stack.set_col(k + j, qr.Q.col_span(j));
        truncate_and_store(dense_svd(core), stack, s);
    }

    cols_seen_ += s;
    reorthonormalize_if_drifted();
    record();
}

void StreamingSvd::truncate_and_store(const SvdFactors& core, const Matrix& left_stack,
                                      std::size_t appended_cols) {
    const std::size_t new_rank = truncate_rank(core.sigma, eps_);

    Matrix rotation(core.U.rows(), new_rank);
    for (std::size_t j = 0; j < new_rank; ++j) rotation.set_col(j, core.U.col_span(j));
    Matrix new_basis = matmul(left_stack, rotation);

    if (right_) {
        // [[V 0] [0 I]] * G, restricted to the retained columns.
        const std::size_t old_cols = right_->rows();
        const std::size_t old_rank = right_->cols();
        Matrix new_right(old_cols + appended_cols, new_rank);
        for (std::size_t j = 0; j < new_rank; ++j) {
            const double* gj = core.V.col(j);
            for (std::size_t r = 0; r < old_cols; ++r) {
                double s = 0.0;
                for (std::size_t c = 0; c < old_rank; ++c) s += (*right_)(r, c) * gj[c];
                new_right(r, j) = s;
            }
            for (std::size_t r = 0; r < appended_cols; ++r) {
                new_right(old_cols + r, j) = (old_rank + r < core.V.rows()) ? gj[old_rank + r] : 0.0;
            }
        }
        right_ = std::move(new_right);
    }

    basis_ = std::move(new_basis);
    sigma_.assign(core.sigma.begin(), core.sigma.begin() + static_cast<std::ptrdiff_t>(new_rank));
}

void StreamingSvd::reorthonormalize_if_drifted() {
    if (orthonormality_error(basis_) <= kOrthoTol) return;
    // Single MGS pass against accumulated roundoff; at most once per update.
    for (std::size_t j = 0; j < basis_.cols(); ++j) {
        double* cj = basis_.col(j);
        for (std::size_t c = 0; c < j; ++c) {
            const double* cc = basis_.col(c);
            double dot = 0.0;
            for (std::size_t i = 0; i < basis_.rows(); ++i) dot += cc[i] * cj[i];
            for (std::size_t i = 0; i < basis_.rows(); ++i) cj[i] -= dot * cc[i];
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < basis_.rows(); ++i) norm += cj[i] * cj[i];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw std::runtime_error("StreamingSvd: basis column collapsed");
        for (std::size_t i = 0; i < basis_.rows(); ++i) cj[i] /= norm;
    }
}

void StreamingSvd::record() {
    SvdUpdateRecord rec;
    rec.rank = rank();
    rec.cols_seen = cols_seen_;
    rec.cpr = static_cast<double>(rec.rank) / static_cast<double>(cols_seen_);
    history_.push_back(rec);
}

CompressionReport StreamingSvd::compression_report(const Matrix& test_snapshots) const {
    if (test_snapshots.rows() != basis_.rows()) {
        throw std::invalid_argument("compression_report: snapshot row count mismatch");
    }
    CompressionReport report;
    report.cpr_curve = history_;
    report.final_rank = rank();
    report.eps_l2_curve.reserve(test_snapshots.cols());
    for (std::size_t j = 0; j < test_snapshots.cols(); ++j) {
        const auto u = test_snapshots.col_span(j);
        std::vector<double> approx = reconstruct(basis_, project(basis_, u));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double d = u[i] - approx[i];
            num += d * d;
            den += u[i] * u[i];
        }
        if (den == 0.0) throw std::invalid_argument("compression_report: zero snapshot column");
        report.eps_l2_curve.emplace_back(j, std::sqrt(num / den));
    }
    return report;
}

std::vector<double> project(const Matrix& basis, std::span<const double> full_field) {
    return matvec_t(basis, full_field);
}

std::vector<double> reconstruct(const Matrix& basis, std::span<const double> reduced) {
    return matvec(basis, reduced);
}

}  // namespace fastsvd
