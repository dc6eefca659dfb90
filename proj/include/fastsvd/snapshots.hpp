#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fastsvd/matrix.hpp"

namespace fastsvd {

/// Uniform 2D node grid; node index = iy * nx + ix (x fastest).
struct Grid2D {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;

    Grid2D() = default;
    Grid2D(std::size_t nx, std::size_t ny, double x_min, double x_max, double y_min,
           double y_max);

    std::size_t node_count() const { return nx * ny; }
    double spacing() const;
    double node_x(std::size_t node) const { return x_min + spacing() * static_cast<double>(node % nx); }
    double node_y(std::size_t node) const { return y_min + spacing() * static_cast<double>(node / nx); }
};

/// Closed-form concentration field of the 2D convection-diffusion benchmark:
/// a Gaussian pulse released at (0.5, 0.5), advected with velocity (vx, vy)
/// and spreading as 1/(1+4t). Values lie in (0, 1] for t >= 0.
std::vector<double> cd_analytic_field(const Grid2D& grid, double vx, double vy, double t);

/// Latin hypercube sample: `count` points, one per stratum per dimension.
std::vector<std::vector<double>> lhs_sample(
    const std::vector<std::pair<double, double>>& bounds, std::size_t count,
    std::uint64_t seed);

struct ParameterSet {
    std::vector<std::vector<double>> training;
    std::vector<std::vector<double>> testing;
    std::vector<std::pair<double, double>> bounds;
};

/// One LHS draw of m + n points; the first m are training, the rest testing.
ParameterSet sample_parameters(const std::vector<std::pair<double, double>>& bounds,
                               std::size_t m_train, std::size_t n_test, std::uint64_t seed);

/// Column-ordered high-fidelity solutions: component-major, then parameter,
/// then time. For a fixed component the columns are exactly the snapshot
/// matrix layout [mu_1: t_1..t_Nt | ... | mu_m: t_1..t_Nt].
class SnapshotSet {
public:
    SnapshotSet() = default;
    SnapshotSet(std::size_t n_nodes, std::vector<std::vector<double>> parameters,
                std::vector<double> times, std::size_t components);

    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t n_times() const { return times_.size(); }
    std::size_t n_params() const { return parameters_.size(); }
    std::size_t components() const { return components_; }
    std::size_t param_dim() const { return parameters_.empty() ? 0 : parameters_[0].size(); }
    std::size_t n_columns() const { return n_times() * n_params() * components_; }

    const std::vector<double>& times() const { return times_; }
    const std::vector<std::vector<double>>& parameters() const { return parameters_; }

    std::size_t column_index(std::size_t component, std::size_t param, std::size_t time) const;
    std::span<double> column(std::size_t component, std::size_t param, std::size_t time);
    std::span<const double> column(std::size_t component, std::size_t param,
                                   std::size_t time) const;

    std::vector<double>& raw_data() { return data_; }
    const std::vector<double>& raw_data() const { return data_; }

    /// Snapshot matrix of one component, N_h x (m * N_t), ordering per above.
    Matrix component_matrix(std::size_t component) const;

private:
    std::size_t n_nodes_ = 0;
    std::size_t components_ = 1;
    std::vector<std::vector<double>> parameters_;
    std::vector<double> times_;
    std::vector<double> data_;
};

/// Assemble a single-component snapshot set from per-parameter, per-time
/// fields. Every (parameter, time) cell must be present with equal length.
SnapshotSet build_snapshot_matrix(const std::vector<std::vector<std::vector<double>>>& fields,
                                  std::vector<std::vector<double>> parameters,
                                  std::vector<double> times);

/// Evaluate the analytic CD field for every parameter and time stamp.
SnapshotSet generate_cd_snapshots(const Grid2D& grid,
                                  const std::vector<std::vector<double>>& parameters,
                                  const std::vector<double>& times);

/// Disjoint index ranges [start, end) covering 0..n_times, each of length s.
/// Throws if s does not divide n_times.
std::vector<std::pair<std::size_t, std::size_t>> partition_times(std::size_t n_times,
                                                                 std::size_t s);

/// Scaling constants fit on training data and frozen afterwards.
///
/// Standardization is pooled per field component (one mean/std pair per
/// component over all projected entries); latent normalization is per latent
/// element. Degenerate spreads fall back to the guard denominator, which
/// maps the data to zero and inverts back exactly.
struct Scalers {
    std::vector<double> mean;   ///< per component
    std::vector<double> stdev;  ///< per component
    std::vector<double> z_min;  ///< per latent element
    std::vector<double> z_max;  ///< per latent element
    double guard = 1e-12;

    double standardize(double x, std::size_t component) const {
        return (x - mean[component]) / std::max(stdev[component], guard);
    }
    double destandardize(double x, std::size_t component) const {
        return x * std::max(stdev[component], guard) + mean[component];
    }
    double normalize(double z, std::size_t element) const {
        return (z - z_min[element]) / std::max(z_max[element] - z_min[element], guard);
    }
    double denormalize(double z, std::size_t element) const {
        return z * std::max(z_max[element] - z_min[element], guard) + z_min[element];
    }
};

/// Fit the pooled mean/std of each component's projected training data.
/// `projected` holds one matrix per component (features x samples).
Scalers fit_standardizer(const std::vector<Matrix>& projected);

/// Fill in the per-element latent min/max (latents: q x samples).
void fit_normalizer(Scalers& scalers, const Matrix& latents);

Matrix standardized(const Matrix& projected, const Scalers& s, std::size_t component);
Matrix normalized_latents(const Matrix& latents, const Scalers& s);

/// Binary snapshot container ("FSVD", little-endian); lossless round trip.
void write_snapshot_file(const std::string& path, const SnapshotSet& set);
SnapshotSet read_snapshot_file(const std::string& path);

/// Plain-text import for small cases: one column per snapshot, header cells
/// "t=<time>;mu=<v1> <v2> ...", grouped per parameter in time order.
SnapshotSet read_snapshot_csv(const std::string& path);

}  // namespace fastsvd
