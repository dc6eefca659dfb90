#include "fastsvd/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fastsvd/adam.hpp"
#include "fastsvd/rng.hpp"

namespace fastsvd {

namespace {
enum Gate { kIn = 0, kFo = 1, kCa = 2, kOut = 3 };

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

WindowedDataset build_windows(const std::vector<Matrix>& latent_series,
                              const std::vector<std::vector<double>>& parameters,
                              std::size_t window) {
    if (latent_series.empty() || latent_series.size() != parameters.size()) {
        throw std::invalid_argument("build_windows: one latent series per parameter required");
    }
    const std::size_t q = latent_series[0].rows();
    const std::size_t xi = parameters[0].size();

    WindowedDataset data;
    data.window = window;
    data.input_size = q + xi;
    data.target_size = q;
    for (std::size_t j = 0; j < latent_series.size(); ++j) {
        const Matrix& series = latent_series[j];
        if (series.rows() != q || parameters[j].size() != xi) {
            throw std::invalid_argument("build_windows: inconsistent latent/parameter dimensions");
        }
        if (series.cols() <= window) {
            throw std::invalid_argument("build_windows: series length must exceed the window");
        }
        const std::size_t count = series.cols() - window;
        for (std::size_t i = 0; i < count; ++i) {
            Matrix input(data.input_size, window);
            for (std::size_t t = 0; t < window; ++t) {
                for (std::size_t r = 0; r < q; ++r) input(r, t) = series(r, i + t);
                for (std::size_t r = 0; r < xi; ++r) input(q + r, t) = parameters[j][r];
            }
            data.inputs.push_back(std::move(input));
            const double* target_col = series.col(i + window);
            data.targets.emplace_back(target_col, target_col + q);
        }
    }
    return data;
}

LstmStepResult lstm_cell_step(std::span<const double> x, std::span<const double> h_prev,
                              std::span<const double> c_prev, std::span<const double> weights,
                              std::span<const double> biases, std::size_t hidden,
                              std::size_t input_size) {
    const std::size_t concat = hidden + input_size;
    if (x.size() != input_size || h_prev.size() != hidden || c_prev.size() != hidden ||
        weights.size() != 4 * hidden * concat || biases.size() != 4 * hidden) {
        throw std::invalid_argument("lstm_cell_step: shape mismatch");
    }

    std::vector<double> cat(concat);
    std::copy(h_prev.begin(), h_prev.end(), cat.begin());
    std::copy(x.begin(), x.end(), cat.begin() + static_cast<std::ptrdiff_t>(hidden));

    auto gate_pre = [&](Gate g, std::size_t unit) {
        const double* row = weights.data() + (static_cast<std::size_t>(g) * hidden + unit) * concat;
        double s = biases[static_cast<std::size_t>(g) * hidden + unit];
        for (std::size_t j = 0; j < concat; ++j) s += row[j] * cat[j];
        return s;
    };

    LstmStepResult r;
    r.input_gate.resize(hidden);
    r.forget_gate.resize(hidden);
    r.candidate.resize(hidden);
    r.output_gate.resize(hidden);
    r.cell.resize(hidden);
    r.hidden.resize(hidden);
    for (std::size_t u = 0; u < hidden; ++u) {
        r.input_gate[u] = sigmoid(gate_pre(kIn, u));
        r.forget_gate[u] = sigmoid(gate_pre(kFo, u));
        r.candidate[u] = std::tanh(gate_pre(kCa, u));
        r.output_gate[u] = sigmoid(gate_pre(kOut, u));
        r.cell[u] = r.forget_gate[u] * c_prev[u] + r.input_gate[u] * r.candidate[u];
        r.hidden[u] = r.output_gate[u] * std::tanh(r.cell[u]);
    }
    return r;
}

LstmModel::LstmModel(std::size_t input_size, std::vector<std::size_t> hidden_sizes,
                     std::size_t output_size, Activation head_act)
    : input_size_(input_size),
      output_size_(output_size),
      hidden_(std::move(hidden_sizes)),
      head_act_(head_act) {
    if (input_size_ == 0 || output_size_ == 0 || hidden_.empty()) {
        throw std::invalid_argument("LstmModel: empty dimensions");
    }
    std::size_t offset = 0;
    for (std::size_t l = 0; l < hidden_.size(); ++l) {
        offsets_.push_back(offset);
        const std::size_t concat = hidden_[l] + layer_input_size(l);
        offset += 4 * hidden_[l] * concat + 4 * hidden_[l];
    }
    offsets_.push_back(offset);  // head
    offset += output_size_ * hidden_.back() + output_size_;
    params_.assign(offset, 0.0);
}

std::size_t LstmModel::layer_input_size(std::size_t layer) const {
    return layer == 0 ? input_size_ : hidden_[layer - 1];
}

std::size_t LstmModel::layer_offset(std::size_t layer) const { return offsets_[layer]; }

std::size_t LstmModel::layer_weight_count(std::size_t layer) const {
    return 4 * hidden_[layer] * (hidden_[layer] + layer_input_size(layer));
}

std::size_t LstmModel::head_offset() const { return offsets_[hidden_.size()]; }

void LstmModel::init_weights(std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t l = 0; l < hidden_.size(); ++l) {
        const std::size_t concat = hidden_[l] + layer_input_size(l);
        const double limit = std::sqrt(6.0 / static_cast<double>(concat + hidden_[l]));
        double* w = params_.data() + offsets_[l];
        for (std::size_t i = 0; i < 4 * hidden_[l] * concat; ++i) w[i] = rng.uniform(-limit, limit);
        double* b = w + 4 * hidden_[l] * concat;
        std::fill(b, b + 4 * hidden_[l], 0.0);
        // Forget-gate bias starts at 1 so early training favors memory.
        std::fill(b + kFo * hidden_[l], b + (kFo + 1) * hidden_[l], 1.0);
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(hidden_.back() + output_size_));
    double* w = params_.data() + head_offset();
    for (std::size_t i = 0; i < output_size_ * hidden_.back(); ++i) w[i] = rng.uniform(-limit, limit);
    std::fill(w + output_size_ * hidden_.back(), w + output_size_ * hidden_.back() + output_size_,
              0.0);
}

std::vector<double> LstmModel::predict(const Matrix& window) const {
    if (window.rows() != input_size_) {
        throw std::invalid_argument("LstmModel::predict: window row count mismatch");
    }
    const std::size_t w = window.cols();
    std::vector<std::vector<double>> h(hidden_.size());
    std::vector<std::vector<double>> c(hidden_.size());
    for (std::size_t l = 0; l < hidden_.size(); ++l) {
        h[l].assign(hidden_[l], 0.0);
        c[l].assign(hidden_[l], 0.0);
    }
    std::vector<double> x;
    for (std::size_t t = 0; t < w; ++t) {
        x.assign(window.col(t), window.col(t) + input_size_);
        for (std::size_t l = 0; l < hidden_.size(); ++l) {
            const std::size_t in_l = layer_input_size(l);
            const std::size_t concat = hidden_[l] + in_l;
            std::span<const double> weights(params_.data() + offsets_[l],
                                            4 * hidden_[l] * concat);
            std::span<const double> biases(params_.data() + offsets_[l] + 4 * hidden_[l] * concat,
                                           4 * hidden_[l]);
            LstmStepResult r = lstm_cell_step(x, h[l], c[l], weights, biases, hidden_[l], in_l);
            h[l] = r.hidden;
            c[l] = std::move(r.cell);
            x = h[l];
        }
    }

    const double* wy = params_.data() + head_offset();
    const double* by = wy + output_size_ * hidden_.back();
    std::vector<double> pre(output_size_);
    for (std::size_t o = 0; o < output_size_; ++o) {
        double s = by[o];
        const double* row = wy + o * hidden_.back();
        for (std::size_t j = 0; j < hidden_.back(); ++j) s += row[j] * h.back()[j];
        pre[o] = s;
    }
    std::vector<double> y(output_size_);
    activation_forward(head_act_, pre, y);
    return y;
}

double LstmModel::forward_backward(const Matrix& window, std::span<const double> target,
                                   double grad_scale, std::span<double> grads) const {
    if (window.rows() != input_size_ || target.size() != output_size_ ||
        grads.size() != params_.size()) {
        throw std::invalid_argument("LstmModel::forward_backward: shape mismatch");
    }
    const std::size_t w = window.cols();
    const std::size_t n_layers = hidden_.size();

    // Per layer, per step caches.
    std::vector<std::vector<std::vector<double>>> cat(n_layers), fg(n_layers), ig(n_layers),
        ca(n_layers), og(n_layers), cell(n_layers), tanh_c(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        cat[l].resize(w);
        fg[l].resize(w);
        ig[l].resize(w);
        ca[l].resize(w);
        og[l].resize(w);
        cell[l].resize(w);
        tanh_c[l].resize(w);
    }

    std::vector<std::vector<double>> h(n_layers), c(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        h[l].assign(hidden_[l], 0.0);
        c[l].assign(hidden_[l], 0.0);
    }

    std::vector<double> x;
    for (std::size_t t = 0; t < w; ++t) {
        x.assign(window.col(t), window.col(t) + input_size_);
        for (std::size_t l = 0; l < n_layers; ++l) {
            const std::size_t hl = hidden_[l];
            const std::size_t in_l = layer_input_size(l);
            const std::size_t concat = hl + in_l;
            const double* wp = params_.data() + offsets_[l];
            const double* bp = wp + 4 * hl * concat;

            auto& catv = cat[l][t];
            catv.resize(concat);
            std::copy(h[l].begin(), h[l].end(), catv.begin());
            std::copy(x.begin(), x.end(), catv.begin() + static_cast<std::ptrdiff_t>(hl));

            fg[l][t].resize(hl);
            ig[l][t].resize(hl);
            ca[l][t].resize(hl);
            og[l][t].resize(hl);
            cell[l][t].resize(hl);
            tanh_c[l][t].resize(hl);
            for (std::size_t u = 0; u < hl; ++u) {
                double pre[4];
                for (int g = 0; g < 4; ++g) {
                    const double* row = wp + (static_cast<std::size_t>(g) * hl + u) * concat;
                    double s = bp[static_cast<std::size_t>(g) * hl + u];
                    for (std::size_t j = 0; j < concat; ++j) s += row[j] * catv[j];
                    pre[g] = s;
                }
                ig[l][t][u] = sigmoid(pre[kIn]);
                fg[l][t][u] = sigmoid(pre[kFo]);
                ca[l][t][u] = std::tanh(pre[kCa]);
                og[l][t][u] = sigmoid(pre[kOut]);
                const double cc = fg[l][t][u] * c[l][u] + ig[l][t][u] * ca[l][t][u];
                cell[l][t][u] = cc;
                tanh_c[l][t][u] = std::tanh(cc);
                h[l][u] = og[l][t][u] * tanh_c[l][t][u];
            }
            c[l] = cell[l][t];
            x = h[l];
        }
    }

    // Head forward.
    const std::size_t hl_last = hidden_.back();
    const double* wy = params_.data() + head_offset();
    const double* by = wy + output_size_ * hl_last;
    std::vector<double> pre_head(output_size_), y(output_size_);
    for (std::size_t o = 0; o < output_size_; ++o) {
        double s = by[o];
        const double* row = wy + o * hl_last;
        for (std::size_t j = 0; j < hl_last; ++j) s += row[j] * h.back()[j];
        pre_head[o] = s;
    }
    activation_forward(head_act_, pre_head, y);

    double sq_err = 0.0;
    std::vector<double> dy(output_size_);
    for (std::size_t o = 0; o < output_size_; ++o) {
        const double d = y[o] - target[o];
        sq_err += d * d;
        dy[o] = 2.0 * d * grad_scale;
    }

    // Head backward.
    std::vector<double> dz_head(output_size_);
    activation_backward(head_act_, pre_head, y, dy, dz_head);
    double* wy_g = grads.data() + head_offset();
    double* by_g = wy_g + output_size_ * hl_last;
    std::vector<double> dh_top(hl_last, 0.0);
    for (std::size_t o = 0; o < output_size_; ++o) {
        const double d = dz_head[o];
        by_g[o] += d;
        double* grow = wy_g + o * hl_last;
        const double* row = wy + o * hl_last;
        for (std::size_t j = 0; j < hl_last; ++j) {
            grow[j] += d * h.back()[j];
            dh_top[j] += d * row[j];
        }
    }

    // Backprop through time, top layer first; dx flows to the layer below.
    std::vector<std::vector<double>> dh_from_above(w);
    for (std::size_t t = 0; t < w; ++t) dh_from_above[t].assign(hl_last, 0.0);
    dh_from_above[w - 1] = dh_top;

    for (std::size_t l = n_layers; l-- > 0;) {
        const std::size_t hl = hidden_[l];
        const std::size_t in_l = layer_input_size(l);
        const std::size_t concat = hl + in_l;
        const double* wp = params_.data() + offsets_[l];
        double* wg = grads.data() + offsets_[l];
        double* bg = wg + 4 * hl * concat;

        std::vector<std::vector<double>> dx_below(w);
        if (l > 0) {
            for (std::size_t t = 0; t < w; ++t) dx_below[t].assign(in_l, 0.0);
        }

        std::vector<double> dh_rec(hl, 0.0), dc(hl, 0.0), dcat(concat);
        double dpre[4];
        for (std::size_t t = w; t-- > 0;) {
            std::fill(dcat.begin(), dcat.end(), 0.0);
            for (std::size_t u = 0; u < hl; ++u) {
                const double dh = dh_from_above[t][u] + dh_rec[u];
                const double f = fg[l][t][u], i = ig[l][t][u];
                const double cand = ca[l][t][u], o = og[l][t][u];
                const double tc = tanh_c[l][t][u];
                const double c_prev = (t > 0) ? cell[l][t - 1][u] : 0.0;

                const double dct = dc[u] + dh * o * (1.0 - tc * tc);
                dpre[kIn] = dct * cand * i * (1.0 - i);
                dpre[kFo] = dct * c_prev * f * (1.0 - f);
                dpre[kCa] = dct * i * (1.0 - cand * cand);
                dpre[kOut] = dh * tc * o * (1.0 - o);
                dc[u] = dct * f;

                const double* catv = cat[l][t].data();
                for (int g = 0; g < 4; ++g) {
                    const double d = dpre[g];
                    if (d == 0.0) continue;
                    const std::size_t base = (static_cast<std::size_t>(g) * hl + u) * concat;
                    bg[static_cast<std::size_t>(g) * hl + u] += d;
                    double* grow = wg + base;
                    const double* row = wp + base;
                    for (std::size_t j = 0; j < concat; ++j) {
                        grow[j] += d * catv[j];
                        dcat[j] += d * row[j];
                    }
                }
            }
            std::copy(dcat.begin(), dcat.begin() + static_cast<std::ptrdiff_t>(hl),
                      dh_rec.begin());
            if (l > 0) {
                for (std::size_t j = 0; j < in_l; ++j) dx_below[t][j] += dcat[hl + j];
            }
        }
        if (l > 0) dh_from_above = std::move(dx_below);
    }
    return sq_err;
}

TrainReport train_lstm(LstmModel& model, const WindowedDataset& data,
                       const TrainOptions& options) {
    if (data.inputs.empty()) throw std::invalid_argument("train_lstm: empty dataset");
    if (data.input_size != model.input_size() || data.target_size != model.output_size()) {
        throw std::invalid_argument("train_lstm: dataset does not match the model");
    }

    Rng rng(options.seed);
    std::vector<std::size_t> order(data.inputs.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t val_count =
        static_cast<std::size_t>(static_cast<double>(order.size()) * options.val_fraction);
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.end() - static_cast<std::ptrdiff_t>(val_count));
    std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(val_count),
                                     order.end());

    AdamState adam(model.param_count(), {.lr = options.lr});
    std::vector<double> grads(model.param_count());

    TrainReport report;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        adam.set_lr(scheduled_lr(options.lr, options.cosine_decay, epoch, options.epochs));
        rng.shuffle(train_idx);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += options.batch) {
            const std::size_t bsz = std::min(options.batch, train_idx.size() - start);
            std::fill(grads.begin(), grads.end(), 0.0);
            for (std::size_t b = 0; b < bsz; ++b) {
                const std::size_t idx = train_idx[start + b];
                epoch_loss += model.forward_backward(data.inputs[idx], data.targets[idx],
                                                     1.0 / static_cast<double>(bsz), grads);
            }
            adam.step(model.params(), grads);
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));

        if (!val_idx.empty()) {
            double val = 0.0;
            for (std::size_t idx : val_idx) {
                const auto y = model.predict(data.inputs[idx]);
                for (std::size_t o = 0; o < y.size(); ++o) {
                    const double d = y[o] - data.targets[idx][o];
                    val += d * d;
                }
            }
            report.val_loss.push_back(val / static_cast<double>(val_idx.size()));
        } else {
            report.val_loss.push_back(report.train_loss.back());
        }
    }
    return report;
}

double lstm_dataset_loss(const LstmModel& model, const WindowedDataset& data) {
    if (data.inputs.empty()) throw std::invalid_argument("lstm_dataset_loss: empty dataset");
    double total = 0.0;
    for (std::size_t i = 0; i < data.inputs.size(); ++i) {
        const auto y = model.predict(data.inputs[i]);
        for (std::size_t o = 0; o < y.size(); ++o) {
            const double d = y[o] - data.targets[i][o];
            total += d * d;
        }
    }
    return total / static_cast<double>(data.inputs.size());
}

}  // namespace fastsvd
