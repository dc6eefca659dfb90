#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "fastsvd/matrix.hpp"

namespace fastsvd {

struct SvdUpdateRecord {
    std::size_t rank = 0;
    std::size_t cols_seen = 0;
    double cpr = 0.0;  ///< rank / cols_seen at this update
};

struct CompressionReport {
    std::vector<SvdUpdateRecord> cpr_curve;
    std::vector<std::pair<std::size_t, double>> eps_l2_curve;  ///< (time index, eps_l2)
    std::size_t final_rank = 0;
};

struct StreamingSvdOptions {
    bool track_v = false;  ///< keep right singular vectors (memory grows with cols seen)
};

/// Incremental truncated SVD over snapshot blocks.
///
/// Seeded with the truncated SVD of the first block; every further block E
/// goes through the rank-update sequence: project E onto the current basis,
/// QR-factor the residual (I - U U^T) E, assemble the small core matrix
///
///     [ Sigma   U^T E ]
///     [   0       R   ]
///
/// take its dense SVD, rotate [U Q] by the left factor and re-truncate the
/// spectrum against the relative tolerance. Exactly one consumer may call
/// update() at a time; basis() on a finalized stream is safe to share.
class StreamingSvd {
public:
    StreamingSvd(const Matrix& first_block, double eps, StreamingSvdOptions options = {});

    /// Absorb a new block of snapshot columns (same row count as the basis).
    void update(const Matrix& block);

    std::size_t rank() const { return sigma_.size(); }
    std::size_t rows() const { return basis_.rows(); }
    std::size_t cols_seen() const { return cols_seen_; }
    double eps() const { return eps_; }

    const Matrix& basis() const { return basis_; }
    const std::vector<double>& singular_values() const { return sigma_; }
    /// Right factor; only populated when track_v was requested.
    const std::optional<Matrix>& right_vectors() const { return right_; }
    const std::vector<SvdUpdateRecord>& history() const { return history_; }

    /// CPR curve from the update history plus the eps_l2 reconstruction
    /// error of each supplied snapshot column against the current basis.
    CompressionReport compression_report(const Matrix& test_snapshots) const;

private:
    void truncate_and_store(const SvdFactors& core, const Matrix& left_stack,
                            std::size_t appended_cols);
    void reorthonormalize_if_drifted();
    void record();

    Matrix basis_;               // N_h x k, orthonormal columns
    std::vector<double> sigma_;  // descending
    std::optional<Matrix> right_;
    double eps_ = 0.0;
    std::size_t cols_seen_ = 0;
    std::vector<SvdUpdateRecord> history_;
};

/// u_n = U^T u_h
std::vector<double> project(const Matrix& basis, std::span<const double> full_field);
/// u_h ~= U u_n
std::vector<double> reconstruct(const Matrix& basis, std::span<const double> reduced);

}  // namespace fastsvd
