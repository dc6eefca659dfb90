#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fastsvd/activations.hpp"
#include "fastsvd/tensor.hpp"

namespace fastsvd {

enum class LayerKind { dense, conv2d, maxpool2d, upsample2d, flatten, reshape };

/// One layer of a feed-forward stack. Convolutions are fixed 3x3 stride-1
/// same-padding; pooling and upsampling are fixed factor 2.
struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    std::size_t units = 0;                    // dense
    std::size_t channels = 0;                 // conv2d
    std::array<std::size_t, 3> target{};      // reshape (h, w, c)
    Activation act = Activation::linear;

    static LayerSpec dense(std::size_t units, Activation act);
    static LayerSpec conv2d(std::size_t channels, Activation act);
    static LayerSpec maxpool2d();
    static LayerSpec upsample2d();
    static LayerSpec flatten();
    static LayerSpec reshape(std::size_t h, std::size_t w, std::size_t c);

    /// Token form, e.g. "conv:25@elu", "pool", "up", "flatten",
    /// "dense:20@elu", "reshape:2,2,3".
    static LayerSpec parse(const std::string& token);
    std::string to_string() const;
};

std::vector<LayerSpec> parse_layer_stack(const std::string& tokens);
std::string format_layer_stack(const std::vector<LayerSpec>& specs);

struct NetworkCache {
    std::vector<Tensor> acts;  ///< acts[0] = input, acts[i+1] = output of layer i
    std::vector<Tensor> pre;   ///< pre-activation of layer i (parametric layers only)
    std::vector<std::vector<std::size_t>> argmax;  ///< pool winners per layer
};

/// Feed-forward stack over a flat parameter vector.
///
/// Forward passes are const and allocate their own scratch, so inference on
/// a fixed network is safe from any number of threads; training owns the
/// parameter vector exclusively.
class Network {
public:
    Network() = default;
    Network(std::vector<std::size_t> input_shape, std::vector<LayerSpec> specs);

    void init_glorot(std::uint64_t seed);

    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    const std::vector<LayerSpec>& specs() const { return specs_; }
    const std::vector<std::size_t>& input_shape() const { return input_shape_; }
    std::vector<std::size_t> output_shape() const;

    /// Inference; input shape = {batch, <input_shape...>}.
    Tensor forward(const Tensor& x) const;
    /// Training forward; fills the cache consumed by backward().
    Tensor forward(const Tensor& x, NetworkCache& cache) const;
    /// Accumulates parameter gradients (param_grads must be zeroed by the
    /// caller across batches as needed) and returns the input gradient.
    Tensor backward(const Tensor& grad_out, const NetworkCache& cache,
                    std::span<double> param_grads) const;

private:
    struct Compiled {
        LayerSpec spec;
        std::vector<std::size_t> in_shape;   // without batch dim
        std::vector<std::size_t> out_shape;  // without batch dim
        std::size_t param_offset = 0;
        std::size_t weight_count = 0;
        std::size_t bias_count = 0;
    };

    Tensor run(const Tensor& x, NetworkCache* cache) const;

    std::vector<std::size_t> input_shape_;
    std::vector<LayerSpec> specs_;
    std::vector<Compiled> layers_;
    std::vector<double> params_;
};

}  // namespace fastsvd
