#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fastsvd/cae.hpp"
#include "fastsvd/ffnn.hpp"
#include "fastsvd/lstm.hpp"
#include "fastsvd/matrix.hpp"
#include "fastsvd/snapshots.hpp"
#include "fastsvd/svd_stream.hpp"

namespace fastsvd {

/// Per-model training hyperparameters.
struct StageOptions {
    std::size_t epochs = 100;
    std::size_t batch = 8;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    bool cosine_decay = false;
    double val_fraction = 0.1;

    TrainOptions to_train_options() const {
        return {epochs, batch, lr, seed, val_fraction, cosine_decay};
    }
};

struct PipelineConfig {
    // data
    std::string source = "analytic";  ///< analytic | file
    std::string snapshot_file;
    std::size_t grid_nx = 64, grid_ny = 64;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    double t_final = 0.0075;
    double dt = 1e-4;
    std::size_t stride = 1;
    std::size_t m_train = 6;
    std::size_t n_test = 2;
    std::vector<std::pair<double, double>> mu_bounds = {{100.0, 200.0}, {100.0, 200.0}};
    std::uint64_t sampling_seed = 2024;

    // svd
    double svd_eps = 1e-7;
    std::size_t block_size = 25;  ///< s; must divide N_t
    bool track_v = false;

    // cae
    std::size_t q = 4;
    std::size_t side = 0;  ///< 0 = auto (smallest power of two covering the basis)
    std::string encoder_stack;  ///< empty = shipped default
    std::string decoder_stack;
    StageOptions cae{1500, 8, 1e-3, 11, false, 0.1};

    // lstm
    std::size_t window = 10;
    std::vector<std::size_t> lstm_hidden = {50, 50, 50};
    std::string lstm_head = "linear";  ///< linear | softmax
    StageOptions lstm{1500, 5, 1e-3, 12, false, 0.1};

    // ffnn
    std::vector<std::size_t> ffnn_hidden = {50};
    std::string ffnn_activation = "leaky_relu";
    StageOptions ffnn{1000, 1, 0.2, 13, false, 0.1};

    // nas
    std::vector<std::string> nas_candidates = {"sigmoid", "leaky_relu", "relu", "elu", "swish"};
    StageOptions nas{300, 5, 0.01, 14, false, 0.1};

    std::size_t n_times() const;
    std::vector<double> times() const;
    void validate() const;
};

/// Everything the online phase needs, staged: compress -> cae -> lstm ->
/// ffnn. Partial bundles persist between CLI stages.
struct ModelBundle {
    PipelineConfig config;

    std::vector<Matrix> bases;                            ///< one basis per field component
    std::vector<std::vector<double>> sigmas;              ///< singular values per component
    std::vector<std::vector<SvdUpdateRecord>> svd_history;
    std::vector<std::size_t> component_rank;              ///< retained rank per component
    std::vector<double> times;                            ///< training time stamps t_1..t_Nt
    Scalers scalers;
    CaeModel cae;
    LstmModel lstm;
    FfnnModel ffnn;

    bool has_basis = false;
    bool has_cae = false;
    bool has_lstm = false;
    bool has_ffnn = false;
    std::uint64_t data_checksum = 0;

    std::size_t components() const { return bases.size(); }
    std::size_t n_nodes() const { return bases.empty() ? 0 : bases[0].rows(); }
    /// Padded per-channel length the CAE consumes (max component rank).
    std::size_t cae_input_len() const;
    std::vector<double> scale_mu(std::span<const double> mu) const;
    /// t_1..t_steps, extending the training grid uniformly past its end.
    std::vector<double> prediction_times(std::size_t steps) const;
    void require_complete() const;
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct TrainingSummary {
    std::vector<StageTiming> timings;
    TrainReport cae_report;
    TrainReport lstm_report;
    TrainReport ffnn_report;
    std::size_t basis_rank = 0;
};

/// Generate analytic snapshots or load them from the configured file.
SnapshotSet acquire_snapshots(const PipelineConfig& config);

/// Streaming SVD over the (parameter, subset) blocks in Algorithm-1 order.
void compress_stage(ModelBundle& bundle, const SnapshotSet& snapshots);
void cae_stage(ModelBundle& bundle, const SnapshotSet& snapshots, TrainReport* report);
void lstm_stage(ModelBundle& bundle, const SnapshotSet& snapshots, TrainReport* report);
void ffnn_stage(ModelBundle& bundle, const SnapshotSet& snapshots, TrainReport* report);

/// Full offline phase on the given snapshots.
std::pair<ModelBundle, TrainingSummary> offline_train(const PipelineConfig& config,
                                                      const SnapshotSet& snapshots);
std::pair<ModelBundle, TrainingSummary> offline_train(const PipelineConfig& config);

/// Normalized latent trajectory for `steps` time steps: FFNN seeds the first
/// window, the LSTM rolls forward autoregressively.
Matrix predict_latents(const ModelBundle& bundle, std::span<const double> mu, std::size_t steps);

/// Full-field predictions for steps 1..steps (steps may exceed N_t).
SnapshotSet online_predict(const ModelBundle& bundle, std::span<const double> mu,
                           std::size_t steps);

struct ForecastResult {
    SnapshotSet fields;
    std::vector<bool> extrapolated;  ///< per step: t beyond the training horizon
};

ForecastResult forecast(const ModelBundle& bundle, std::span<const double> mu,
                        std::size_t horizon);

void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

}  // namespace fastsvd
