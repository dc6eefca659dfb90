#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fastsvd/activations.hpp"
#include "fastsvd/cae.hpp"
#include "fastsvd/matrix.hpp"

namespace fastsvd {

/// Sliding-window one-step-ahead dataset: window i of a parameter's latent
/// series spans steps i..i+w-1 and targets step i+w; each step vector is the
/// latent state with the parameter vector appended.
struct WindowedDataset {
    std::size_t window = 0;
    std::size_t input_size = 0;   ///< latent dim + parameter dim
    std::size_t target_size = 0;  ///< latent dim
    std::vector<Matrix> inputs;   ///< each input_size x window, columns = steps
    std::vector<std::vector<double>> targets;
};

/// One latent series per parameter (latent dim x N_t). Requires N_t > w.
WindowedDataset build_windows(const std::vector<Matrix>& latent_series,
                              const std::vector<std::vector<double>>& parameters,
                              std::size_t window);

/// Gate activations and state of a single cell step (kept for verification).
struct LstmStepResult {
    std::vector<double> input_gate;
    std::vector<double> forget_gate;
    std::vector<double> candidate;
    std::vector<double> output_gate;
    std::vector<double> cell;
    std::vector<double> hidden;
};

/// One LSTM cell step. Weights hold the four gate blocks in order
/// in/fo/ca/out, each hidden x (hidden + input) over the concatenation
/// [h_prev, x]; biases follow the same gate order.
LstmStepResult lstm_cell_step(std::span<const double> x, std::span<const double> h_prev,
                              std::span<const double> c_prev, std::span<const double> weights,
                              std::span<const double> biases, std::size_t hidden,
                              std::size_t input_size);

/// Stacked LSTM with a dense head on the final hidden state.
class LstmModel {
public:
    LstmModel() = default;
    LstmModel(std::size_t input_size, std::vector<std::size_t> hidden_sizes,
              std::size_t output_size, Activation head_act = Activation::linear);

    void init_weights(std::uint64_t seed);

    std::size_t input_size() const { return input_size_; }
    std::size_t output_size() const { return output_size_; }
    const std::vector<std::size_t>& hidden_sizes() const { return hidden_; }
    Activation head_activation() const { return head_act_; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t param_count() const { return params_.size(); }

    /// Run a window (input_size x w, zero initial states) through the stack
    /// and apply the head to the last hidden state.
    std::vector<double> predict(const Matrix& window) const;

    /// Forward + backprop-through-time for one window under the loss
    /// grad_scale * ||y - target||^2. Accumulates parameter gradients into
    /// `grads` and returns the window's squared error ||y - target||^2.
    double forward_backward(const Matrix& window, std::span<const double> target,
                            double grad_scale, std::span<double> grads) const;

    // Flat parameter layout helpers (per layer: gate weights then biases).
    std::size_t layer_offset(std::size_t layer) const;
    std::size_t layer_weight_count(std::size_t layer) const;
    std::size_t layer_input_size(std::size_t layer) const;
    std::size_t head_offset() const;

private:
    std::size_t input_size_ = 0;
    std::size_t output_size_ = 0;
    std::vector<std::size_t> hidden_;
    Activation head_act_ = Activation::linear;
    std::vector<double> params_;
    std::vector<std::size_t> offsets_;
};

TrainReport train_lstm(LstmModel& model, const WindowedDataset& data,
                       const TrainOptions& options);

/// Mean over windows of ||target - prediction||^2.
double lstm_dataset_loss(const LstmModel& model, const WindowedDataset& data);

}  // namespace fastsvd
