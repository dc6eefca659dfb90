#include "fastsvd/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "fastsvd/bundle.hpp"

namespace fastsvd {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoul(tok));
    return out;
}

std::string join_strings(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& x : v) out += (out.empty() ? "" : ",") + x;
    return out;
}

std::vector<std::string> split_strings(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

}  // namespace

std::size_t PipelineConfig::n_times() const {
    const double step = dt * static_cast<double>(stride);
    return static_cast<std::size_t>(std::llround(t_final / step));
}

std::vector<double> PipelineConfig::times() const {
    const double step = dt * static_cast<double>(stride);
    std::vector<double> out(n_times());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = step * static_cast<double>(i + 1);
    return out;
}

void PipelineConfig::validate() const {
    if (source != "analytic" && source != "file") {
        throw std::invalid_argument("config: data source must be 'analytic' or 'file'");
    }
    if (source == "file" && snapshot_file.empty()) {
        throw std::invalid_argument("config: file source requires a snapshot_file");
    }
    if (grid_nx < 2 || grid_ny < 2) throw std::invalid_argument("config: grid must be >= 2x2");
    if (!(dt > 0.0) || !(t_final > 0.0) || stride == 0) {
        throw std::invalid_argument("config: time discretization must be positive");
    }
    if (n_times() == 0) throw std::invalid_argument("config: no time steps in (0, T]");
    if (m_train == 0) throw std::invalid_argument("config: need at least one training parameter");
    if (mu_bounds.empty()) throw std::invalid_argument("config: empty parameter space");
    for (const auto& [lo, hi] : mu_bounds) {
        if (!(hi > lo)) throw std::invalid_argument("config: invalid parameter bounds");
    }
    if (!(svd_eps > 0.0)) throw std::invalid_argument("config: svd_eps must be > 0");
    if (block_size == 0) throw std::invalid_argument("config: block_size must be >= 1");
    if (q == 0) throw std::invalid_argument("config: latent dimension must be >= 1");
    if (window == 0) throw std::invalid_argument("config: window must be >= 1");
    if (source == "analytic") {
        // File-sourced time grids are validated against these in the stages.
        if (n_times() % block_size != 0) {
            throw std::invalid_argument(
                "config: block_size must divide the time step count exactly");
        }
        if (window >= n_times()) {
            throw std::invalid_argument("config: window must satisfy 0 < w < N_t");
        }
    }
    if (lstm_head != "linear" && lstm_head != "softmax") {
        throw std::invalid_argument("config: lstm_head must be 'linear' or 'softmax'");
    }
    if (lstm_hidden.empty() || ffnn_hidden.empty()) {
        throw std::invalid_argument("config: hidden layer lists must be nonempty");
    }
    activation_from_name(ffnn_activation);
    for (const auto& c : nas_candidates) activation_from_name(c);
}

std::size_t ModelBundle::cae_input_len() const {
    std::size_t len = 0;
    for (std::size_t r : component_rank) len = std::max(len, r);
    return len;
}

std::vector<double> ModelBundle::scale_mu(std::span<const double> mu) const {
    if (mu.size() != config.mu_bounds.size()) {
        throw std::invalid_argument("parameter vector has the wrong dimension");
    }
    std::vector<double> out(mu.size());
    for (std::size_t d = 0; d < mu.size(); ++d) {
        const auto [lo, hi] = config.mu_bounds[d];
        out[d] = (mu[d] - lo) / (hi - lo);
    }
    return out;
}

std::vector<double> ModelBundle::prediction_times(std::size_t steps) const {
    if (times.empty()) throw std::runtime_error("bundle has no training time grid");
    const double step =
        times.size() > 1 ? times[1] - times[0] : times[0];
    std::vector<double> out(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        out[i] = i < times.size()
                     ? times[i]
                     : times.back() + step * static_cast<double>(i + 1 - times.size());
    }
    return out;
}

void ModelBundle::require_complete() const {
    std::string missing;
    if (!has_basis) missing += " basis";
    if (!has_cae) missing += " cae";
    if (!has_lstm) missing += " lstm";
    if (!has_ffnn) missing += " ffnn";
    if (!missing.empty()) {
        throw std::runtime_error("model bundle is incomplete: missing" + missing);
    }
}

SnapshotSet acquire_snapshots(const PipelineConfig& config) {
    config.validate();
    if (config.source == "file") {
        return read_snapshot_file(config.snapshot_file);
    }
    const Grid2D grid(config.grid_nx, config.grid_ny, config.x_min, config.x_max, config.y_min,
                      config.y_max);
    const ParameterSet params =
        sample_parameters(config.mu_bounds, config.m_train, config.n_test, config.sampling_seed);
    return generate_cd_snapshots(grid, params.training, config.times());
}

void compress_stage(ModelBundle& bundle, const SnapshotSet& snapshots) {
    const PipelineConfig& config = bundle.config;
    const auto subsets = partition_times(snapshots.n_times(), config.block_size);

    bundle.bases.clear();
    bundle.sigmas.clear();
    bundle.svd_history.clear();
    bundle.component_rank.clear();

    for (std::size_t c = 0; c < snapshots.components(); ++c) {
        std::optional<StreamingSvd> stream;
        Matrix block(snapshots.n_nodes(), config.block_size);
        // Algorithm-1 order: all subsets of parameter 1, then parameter 2, ...
        for (std::size_t j = 0; j < snapshots.n_params(); ++j) {
            for (const auto& [start, end] : subsets) {
                for (std::size_t t = start; t < end; ++t) {
                    block.set_col(t - start, snapshots.column(c, j, t));
                }
                if (!stream) {
                    stream.emplace(block, config.svd_eps,
                                   StreamingSvdOptions{.track_v = config.track_v});
                } else {
                    stream->update(block);
                }
            }
        }
        bundle.bases.push_back(stream->basis());
        bundle.sigmas.push_back(stream->singular_values());
        bundle.svd_history.push_back(stream->history());
        bundle.component_rank.push_back(stream->rank());
    }
    bundle.data_checksum = fnv1a(snapshots.raw_data().data(),
                                 snapshots.raw_data().size() * sizeof(double));
    bundle.has_basis = true;
}

namespace {

/// Standardized, zero-padded CAE samples: rows = channels * input_len,
/// one column per (parameter, time) snapshot.
Matrix assemble_cae_samples(const ModelBundle& bundle, const SnapshotSet& snapshots) {
    const std::size_t input_len = bundle.cae_input_len();
    const std::size_t channels = bundle.components();
    Matrix samples(channels * input_len, snapshots.n_params() * snapshots.n_times());
    for (std::size_t c = 0; c < channels; ++c) {
        const Matrix& basis = bundle.bases[c];
        for (std::size_t j = 0; j < snapshots.n_params(); ++j) {
            for (std::size_t t = 0; t < snapshots.n_times(); ++t) {
                const auto coeffs = project(basis, snapshots.column(c, j, t));
                double* col = samples.col(j * snapshots.n_times() + t);
                for (std::size_t i = 0; i < coeffs.size(); ++i) {
                    col[c * input_len + i] = bundle.scalers.standardize(coeffs[i], c);
                }
            }
        }
    }
    return samples;
}

}  // namespace

void cae_stage(ModelBundle& bundle, const SnapshotSet& snapshots, TrainReport* report) {
    if (!bundle.has_basis) throw std::runtime_error("cae_stage: bundle has no basis yet");
    const PipelineConfig& config = bundle.config;

    // Pooled standardization constants per component over the projected data.
    std::vector<Matrix> projected;
    for (std::size_t c = 0; c < bundle.components(); ++c) {
        Matrix coeffs(bundle.component_rank[c], snapshots.n_params() * snapshots.n_times());
        for (std::size_t j = 0; j < snapshots.n_params(); ++j)
            for (std::size_t t = 0; t < snapshots.n_times(); ++t)
                coeffs.set_col(j * snapshots.n_times() + t,
                               project(bundle.bases[c], snapshots.column(c, j, t)));
        projected.push_back(std::move(coeffs));
    }
    bundle.scalers = fit_standardizer(projected);

    const std::size_t input_len = bundle.cae_input_len();
    const std::size_t channels = bundle.components();
    if (config.q >= input_len * channels) {
        throw std::invalid_argument("cae_stage: latent dimension must be below the basis rank");
    }
    const std::size_t side = config.side != 0 ? config.side : default_cae_side(input_len);
    const auto encoder = config.encoder_stack.empty() ? default_encoder_stack(config.q)
                                                      : parse_layer_stack(config.encoder_stack);
    const auto decoder = config.decoder_stack.empty() ? default_decoder_stack(side, channels)
                                                      : parse_layer_stack(config.decoder_stack);
    bundle.cae = CaeModel(input_len, channels, side, config.q, encoder, decoder);
    bundle.cae.init_weights(config.cae.seed);

    const Matrix samples = assemble_cae_samples(bundle, snapshots);
    const TrainReport r = train_cae(bundle.cae, samples, config.cae.to_train_options());
    if (!std::isfinite(r.train_loss.back())) {
        throw std::runtime_error("cae_stage: training diverged (non-finite loss)");
    }
    if (report) *report = r;

    // Latent normalization constants come from the trained encoder.
    fit_normalizer(bundle.scalers, bundle.cae.encode_all(samples));
    bundle.has_cae = true;
}

namespace {

/// Normalized latent series of every training parameter (q x N_t each).
std::vector<Matrix> training_latent_series(const ModelBundle& bundle,
                                           const SnapshotSet& snapshots) {
    const Matrix samples = assemble_cae_samples(bundle, snapshots);
    std::vector<Matrix> series;
    for (std::size_t j = 0; j < snapshots.n_params(); ++j) {
        Matrix z(bundle.cae.latent_dim(), snapshots.n_times());
        for (std::size_t t = 0; t < snapshots.n_times(); ++t) {
            auto lat = bundle.cae.encode(samples.col_span(j * snapshots.n_times() + t));
            for (std::size_t i = 0; i < lat.size(); ++i) {
                lat[i] = bundle.scalers.normalize(lat[i], i);
            }
            z.set_col(t, lat);
        }
        series.push_back(std::move(z));
    }
    return series;
}

std::vector<std::vector<double>> scaled_training_parameters(const ModelBundle& bundle,
                                                            const SnapshotSet& snapshots) {
    std::vector<std::vector<double>> scaled;
    for (const auto& mu : snapshots.parameters()) scaled.push_back(bundle.scale_mu(mu));
    return scaled;
}

}  // namespace

void lstm_stage(ModelBundle& bundle, const SnapshotSet& snapshots, TrainReport* report) {
    if (!bundle.has_cae) throw std::runtime_error("lstm_stage: bundle has no trained CAE yet");
    const PipelineConfig& config = bundle.config;

    const auto series = training_latent_series(bundle, snapshots);
    const auto mu_scaled = scaled_training_parameters(bundle, snapshots);
    const WindowedDataset data = build_windows(series, mu_scaled, config.window);

    bundle.lstm = LstmModel(config.q + config.mu_bounds.size(), config.lstm_hidden, config.q,
                            activation_from_name(config.lstm_head));
    bundle.lstm.init_weights(config.lstm.seed);
    const TrainReport r = train_lstm(bundle.lstm, data, config.lstm.to_train_options());
    if (!std::isfinite(r.train_loss.back())) {
        throw std::runtime_error("lstm_stage: training diverged (non-finite loss)");
    }
    if (report) *report = r;
    bundle.has_lstm = true;
}

void ffnn_stage(ModelBundle& bundle, const SnapshotSet& snapshots, TrainReport* report) {
    if (!bundle.has_cae) throw std::runtime_error("ffnn_stage: bundle has no trained CAE yet");
    const PipelineConfig& config = bundle.config;

    const auto series = training_latent_series(bundle, snapshots);
    const auto mu_scaled = scaled_training_parameters(bundle, snapshots);
    const std::size_t xi = config.mu_bounds.size();
    const std::vector<double> times = config.source == "analytic"
                                          ? config.times()
                                          : snapshots.times();

    Matrix inputs(xi + 1, snapshots.n_params() * config.window);
    Matrix targets(config.q, snapshots.n_params() * config.window);
    for (std::size_t j = 0; j < snapshots.n_params(); ++j) {
        for (std::size_t i = 0; i < config.window; ++i) {
            double* col = inputs.col(j * config.window + i);
            col[0] = times[i] / times.back();
            for (std::size_t d = 0; d < xi; ++d) col[1 + d] = mu_scaled[j][d];
            for (std::size_t r = 0; r < config.q; ++r) {
                targets(r, j * config.window + i) = series[j](r, i);
            }
        }
    }

    bundle.ffnn = make_ffnn(xi + 1, config.ffnn_hidden, config.q,
                            activation_from_name(config.ffnn_activation));
    bundle.ffnn.net.init_glorot(config.ffnn.seed);
    const TrainReport r = train_ffnn(bundle.ffnn, inputs, targets, config.ffnn.to_train_options());
    if (!std::isfinite(r.train_loss.back())) {
        throw std::runtime_error("ffnn_stage: training diverged (non-finite loss)");
    }
    if (report) *report = r;
    bundle.has_ffnn = true;
}

std::pair<ModelBundle, TrainingSummary> offline_train(const PipelineConfig& config,
                                                      const SnapshotSet& snapshots) {
    config.validate();
    ModelBundle bundle;
    bundle.config = config;
    TrainingSummary summary;

    const auto timed = [&](const char* stage, auto&& fn) {
        const double start = now_seconds();
        fn();
        summary.timings.push_back({stage, now_seconds() - start});
    };

    timed("compress", [&] { compress_stage(bundle, snapshots); });
    timed("cae", [&] { cae_stage(bundle, snapshots, &summary.cae_report); });
    timed("lstm", [&] { lstm_stage(bundle, snapshots, &summary.lstm_report); });
    timed("ffnn", [&] { ffnn_stage(bundle, snapshots, &summary.ffnn_report); });
    summary.basis_rank = bundle.cae_input_len();
    return {std::move(bundle), std::move(summary)};
}

std::pair<ModelBundle, TrainingSummary> offline_train(const PipelineConfig& config) {
    return offline_train(config, acquire_snapshots(config));
}

Matrix predict_latents(const ModelBundle& bundle, std::span<const double> mu,
                       std::size_t steps) {
    bundle.require_complete();
    if (steps == 0) throw std::invalid_argument("predict_latents: steps must be >= 1");
    const PipelineConfig& config = bundle.config;
    const std::size_t q = config.q;
    const std::size_t w = config.window;
    const std::size_t xi = config.mu_bounds.size();
    const auto mu_scaled = bundle.scale_mu(mu);
    const double time_step = config.dt * static_cast<double>(config.stride);

    Matrix latents(q, steps);

    // FFNN seeds the first window (Algorithm-2 line 2).
    const std::size_t seeded = std::min(w, steps);
    for (std::size_t i = 0; i < seeded; ++i) {
        std::vector<double> x(xi + 1);
        x[0] = time_step * static_cast<double>(i + 1) / config.t_final;
        for (std::size_t d = 0; d < xi; ++d) x[1 + d] = mu_scaled[d];
        latents.set_col(i, ffnn_predict(bundle.ffnn, x));
    }
    if (steps <= w) return latents;

    // Autoregressive rollout: each prediction joins the sliding window.
    Matrix window(q + xi, w);
    for (std::size_t i = 0; i < w; ++i) {
        for (std::size_t r = 0; r < q; ++r) window(r, i) = latents(r, i);
        for (std::size_t d = 0; d < xi; ++d) window(q + d, i) = mu_scaled[d];
    }
    for (std::size_t i = w; i < steps; ++i) {
        const auto z = bundle.lstm.predict(window);
        latents.set_col(i, z);
        for (std::size_t col = 0; col + 1 < w; ++col) {
            for (std::size_t r = 0; r < q + xi; ++r) window(r, col) = window(r, col + 1);
        }
        for (std::size_t r = 0; r < q; ++r) window(r, w - 1) = z[r];
        for (std::size_t d = 0; d < xi; ++d) window(q + d, w - 1) = mu_scaled[d];
    }
    return latents;
}

SnapshotSet online_predict(const ModelBundle& bundle, std::span<const double> mu,
                           std::size_t steps) {
    bundle.require_complete();
    const PipelineConfig& config = bundle.config;
    const Matrix latents = predict_latents(bundle, mu, steps);
    const std::size_t input_len = bundle.cae_input_len();
    const double time_step = config.dt * static_cast<double>(config.stride);

    std::vector<double> times(steps);
    for (std::size_t i = 0; i < steps; ++i) times[i] = time_step * static_cast<double>(i + 1);

    SnapshotSet out(bundle.n_nodes(), {std::vector<double>(mu.begin(), mu.end())}, times,
                    bundle.components());
    std::vector<double> z(config.q);
    for (std::size_t i = 0; i < steps; ++i) {
        for (std::size_t r = 0; r < config.q; ++r) {
            z[r] = bundle.scalers.denormalize(latents(r, i), r);
        }
        const auto u_std = bundle.cae.decode(z);
        for (std::size_t c = 0; c < bundle.components(); ++c) {
            std::vector<double> coeffs(bundle.component_rank[c]);
            for (std::size_t r = 0; r < coeffs.size(); ++r) {
                coeffs[r] = bundle.scalers.destandardize(u_std[c * input_len + r], c);
            }
            const auto field = reconstruct(bundle.bases[c], coeffs);
            std::copy(field.begin(), field.end(), out.column(c, 0, i).begin());
        }
    }
    return out;
}

ForecastResult forecast(const ModelBundle& bundle, std::span<const double> mu,
                        std::size_t horizon) {
    ForecastResult result;
    result.fields = online_predict(bundle, mu, horizon);
    const double t_final = bundle.config.t_final;
    for (double t : result.fields.times()) {
        result.extrapolated.push_back(t > t_final * (1.0 + 1e-12));
    }
    return result;
}

namespace {

NamedTensor matrix_tensor(const std::string& name, const Matrix& m) {
    return {name, {m.rows(), m.cols()}, m.data()};
}

Matrix tensor_matrix(const NamedTensor& t) {
    if (t.shape.size() != 2) throw std::runtime_error("bundle tensor " + t.name + " is not 2-D");
    return Matrix(t.shape[0], t.shape[1], t.data);
}

void put_stage(BundleFile& file, const std::string& prefix, const StageOptions& s) {
    file.config[prefix + ".epochs"] = std::to_string(s.epochs);
    file.config[prefix + ".batch"] = std::to_string(s.batch);
    file.config[prefix + ".lr"] = format_double(s.lr);
    file.config[prefix + ".seed"] = std::to_string(s.seed);
    file.config[prefix + ".cosine_decay"] = s.cosine_decay ? "1" : "0";
    file.config[prefix + ".val_fraction"] = format_double(s.val_fraction);
}

StageOptions get_stage(const BundleFile& file, const std::string& prefix) {
    StageOptions s;
    s.epochs = std::stoul(file.value(prefix + ".epochs"));
    s.batch = std::stoul(file.value(prefix + ".batch"));
    s.lr = std::stod(file.value(prefix + ".lr"));
    s.seed = std::stoull(file.value(prefix + ".seed"));
    s.cosine_decay = file.value(prefix + ".cosine_decay") == "1";
    s.val_fraction = std::stod(file.value(prefix + ".val_fraction"));
    return s;
}

}  // namespace

void save_bundle(const ModelBundle& bundle, const std::string& path) {
    const PipelineConfig& c = bundle.config;
    BundleFile file;

    file.config["meta.format"] = "1";
    file.config["meta.data_checksum"] = std::to_string(bundle.data_checksum);
    file.config["meta.has_basis"] = bundle.has_basis ? "1" : "0";
    file.config["meta.has_cae"] = bundle.has_cae ? "1" : "0";
    file.config["meta.has_lstm"] = bundle.has_lstm ? "1" : "0";
    file.config["meta.has_ffnn"] = bundle.has_ffnn ? "1" : "0";
    file.config["meta.components"] = std::to_string(bundle.components());
    file.config["meta.component_rank"] = join_sizes(bundle.component_rank);

    file.config["data.source"] = c.source;
    file.config["data.snapshot_file"] = c.snapshot_file;
    file.config["data.grid_nx"] = std::to_string(c.grid_nx);
    file.config["data.grid_ny"] = std::to_string(c.grid_ny);
    file.config["data.x_min"] = format_double(c.x_min);
    file.config["data.x_max"] = format_double(c.x_max);
    file.config["data.y_min"] = format_double(c.y_min);
    file.config["data.y_max"] = format_double(c.y_max);
    file.config["data.t_final"] = format_double(c.t_final);
    file.config["data.dt"] = format_double(c.dt);
    file.config["data.stride"] = std::to_string(c.stride);
    file.config["data.m_train"] = std::to_string(c.m_train);
    file.config["data.n_test"] = std::to_string(c.n_test);
    file.config["data.sampling_seed"] = std::to_string(c.sampling_seed);
    std::string bounds;
    for (const auto& [lo, hi] : c.mu_bounds) {
        bounds += (bounds.empty() ? "" : ",") + format_double(lo) + ":" + format_double(hi);
    }
    file.config["data.mu_bounds"] = bounds;

    file.config["svd.eps"] = format_double(c.svd_eps);
    file.config["svd.block_size"] = std::to_string(c.block_size);
    file.config["svd.track_v"] = c.track_v ? "1" : "0";

    file.config["cae.q"] = std::to_string(c.q);
    file.config["cae.side"] = std::to_string(bundle.has_cae ? bundle.cae.side() : c.side);
    file.config["cae.encoder"] =
        bundle.has_cae ? format_layer_stack(bundle.cae.encoder().specs()) : c.encoder_stack;
    file.config["cae.decoder"] =
        bundle.has_cae ? format_layer_stack(bundle.cae.decoder().specs()) : c.decoder_stack;
    put_stage(file, "cae", c.cae);

    file.config["lstm.window"] = std::to_string(c.window);
    file.config["lstm.hidden"] = join_sizes(c.lstm_hidden);
    file.config["lstm.head"] = c.lstm_head;
    put_stage(file, "lstm", c.lstm);

    file.config["ffnn.hidden"] = join_sizes(c.ffnn_hidden);
    file.config["ffnn.activation"] = c.ffnn_activation;
    put_stage(file, "ffnn", c.ffnn);

    file.config["nas.candidates"] = join_strings(c.nas_candidates);
    put_stage(file, "nas", c.nas);

    if (bundle.has_basis) {
        for (std::size_t comp = 0; comp < bundle.components(); ++comp) {
            const std::string suffix = "." + std::to_string(comp);
            file.tensors.push_back(matrix_tensor("basis.U" + suffix, bundle.bases[comp]));
            file.tensors.push_back(
                {"basis.sigma" + suffix, {bundle.sigmas[comp].size()}, bundle.sigmas[comp]});
            const auto& hist = bundle.svd_history[comp];
            NamedTensor h{"svd.history" + suffix, {hist.size(), 3}, {}};
            for (const auto& rec : hist) {
                h.data.push_back(static_cast<double>(rec.rank));
                h.data.push_back(static_cast<double>(rec.cols_seen));
                h.data.push_back(rec.cpr);
            }
            file.tensors.push_back(std::move(h));
        }
    }
    if (bundle.has_cae) {
        file.tensors.push_back({"scalers.mean", {bundle.scalers.mean.size()}, bundle.scalers.mean});
        file.tensors.push_back(
            {"scalers.std", {bundle.scalers.stdev.size()}, bundle.scalers.stdev});
        file.tensors.push_back(
            {"scalers.zmin", {bundle.scalers.z_min.size()}, bundle.scalers.z_min});
        file.tensors.push_back(
            {"scalers.zmax", {bundle.scalers.z_max.size()}, bundle.scalers.z_max});
        file.tensors.push_back({"scalers.guard", {1}, {bundle.scalers.guard}});
        file.tensors.push_back({"cae.encoder.params",
                                {bundle.cae.encoder().param_count()},
                                bundle.cae.encoder().params()});
        file.tensors.push_back({"cae.decoder.params",
                                {bundle.cae.decoder().param_count()},
                                bundle.cae.decoder().params()});
    }
    if (bundle.has_lstm) {
        file.tensors.push_back({"lstm.params", {bundle.lstm.param_count()}, bundle.lstm.params()});
    }
    if (bundle.has_ffnn) {
        file.tensors.push_back(
            {"ffnn.params", {bundle.ffnn.net.param_count()}, bundle.ffnn.net.params()});
    }
    write_bundle_file(path, file);
}

ModelBundle load_bundle(const std::string& path) {
    const BundleFile file = read_bundle_file(path);
    ModelBundle bundle;
    PipelineConfig& c = bundle.config;

    bundle.data_checksum = std::stoull(file.value("meta.data_checksum"));
    bundle.has_basis = file.value("meta.has_basis") == "1";
    bundle.has_cae = file.value("meta.has_cae") == "1";
    bundle.has_lstm = file.value("meta.has_lstm") == "1";
    bundle.has_ffnn = file.value("meta.has_ffnn") == "1";
    const std::size_t components = std::stoul(file.value("meta.components"));
    if (!file.value("meta.component_rank").empty()) {
        bundle.component_rank = parse_sizes(file.value("meta.component_rank"));
    }

    c.source = file.value("data.source");
    c.snapshot_file = file.value("data.snapshot_file");
    c.grid_nx = std::stoul(file.value("data.grid_nx"));
    c.grid_ny = std::stoul(file.value("data.grid_ny"));
    c.x_min = std::stod(file.value("data.x_min"));
    c.x_max = std::stod(file.value("data.x_max"));
    c.y_min = std::stod(file.value("data.y_min"));
    c.y_max = std::stod(file.value("data.y_max"));
    c.t_final = std::stod(file.value("data.t_final"));
    c.dt = std::stod(file.value("data.dt"));
    c.stride = std::stoul(file.value("data.stride"));
    c.m_train = std::stoul(file.value("data.m_train"));
    c.n_test = std::stoul(file.value("data.n_test"));
    c.sampling_seed = std::stoull(file.value("data.sampling_seed"));
    c.mu_bounds.clear();
    for (const std::string& pair : split_strings(file.value("data.mu_bounds"))) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) {
            throw std::runtime_error("bundle: malformed mu_bounds entry " + pair);
        }
        c.mu_bounds.emplace_back(std::stod(pair.substr(0, colon)),
                                 std::stod(pair.substr(colon + 1)));
    }

    c.svd_eps = std::stod(file.value("svd.eps"));
    c.block_size = std::stoul(file.value("svd.block_size"));
    c.track_v = file.value("svd.track_v") == "1";

    c.q = std::stoul(file.value("cae.q"));
    c.side = std::stoul(file.value("cae.side"));
    c.encoder_stack = file.value("cae.encoder");
    c.decoder_stack = file.value("cae.decoder");
    c.cae = get_stage(file, "cae");

    c.window = std::stoul(file.value("lstm.window"));
    c.lstm_hidden = parse_sizes(file.value("lstm.hidden"));
    c.lstm_head = file.value("lstm.head");
    c.lstm = get_stage(file, "lstm");

    c.ffnn_hidden = parse_sizes(file.value("ffnn.hidden"));
    c.ffnn_activation = file.value("ffnn.activation");
    c.ffnn = get_stage(file, "ffnn");

    c.nas_candidates = split_strings(file.value("nas.candidates"));
    c.nas = get_stage(file, "nas");

    if (bundle.has_basis) {
        for (std::size_t comp = 0; comp < components; ++comp) {
            const std::string suffix = "." + std::to_string(comp);
            bundle.bases.push_back(tensor_matrix(file.tensor("basis.U" + suffix)));
            bundle.sigmas.push_back(file.tensor("basis.sigma" + suffix).data);
            const NamedTensor& h = file.tensor("svd.history" + suffix);
            std::vector<SvdUpdateRecord> hist;
            for (std::size_t i = 0; i < h.shape[0]; ++i) {
                hist.push_back({static_cast<std::size_t>(h.data[3 * i]),
                                static_cast<std::size_t>(h.data[3 * i + 1]), h.data[3 * i + 2]});
            }
            bundle.svd_history.push_back(std::move(hist));
        }
    }
    if (bundle.has_cae) {
        bundle.scalers.mean = file.tensor("scalers.mean").data;
        bundle.scalers.stdev = file.tensor("scalers.std").data;
        bundle.scalers.z_min = file.tensor("scalers.zmin").data;
        bundle.scalers.z_max = file.tensor("scalers.zmax").data;
        bundle.scalers.guard = file.tensor("scalers.guard").data.at(0);
        bundle.cae = CaeModel(bundle.cae_input_len(), components, c.side, c.q,
                              parse_layer_stack(c.encoder_stack),
                              parse_layer_stack(c.decoder_stack));
        bundle.cae.encoder().params() = file.tensor("cae.encoder.params").data;
        bundle.cae.decoder().params() = file.tensor("cae.decoder.params").data;
    }
    if (bundle.has_lstm) {
        bundle.lstm = LstmModel(c.q + c.mu_bounds.size(), c.lstm_hidden, c.q,
                                activation_from_name(c.lstm_head));
        if (file.tensor("lstm.params").data.size() != bundle.lstm.param_count()) {
            throw std::runtime_error("bundle: lstm parameter size mismatch");
        }
        bundle.lstm.params() = file.tensor("lstm.params").data;
    }
    if (bundle.has_ffnn) {
        bundle.ffnn = make_ffnn(c.mu_bounds.size() + 1, c.ffnn_hidden, c.q,
                                activation_from_name(c.ffnn_activation));
        if (file.tensor("ffnn.params").data.size() != bundle.ffnn.net.param_count()) {
            throw std::runtime_error("bundle: ffnn parameter size mismatch");
        }
        bundle.ffnn.net.params() = file.tensor("ffnn.params").data;
    }
    return bundle;
}

}  // namespace fastsvd
