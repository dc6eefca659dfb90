#include "fastsvd/network.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fastsvd/rng.hpp"

namespace fastsvd {

LayerSpec LayerSpec::dense(std::size_t units, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.units = units;
    s.act = act;
    return s;
}
LayerSpec LayerSpec::conv2d(std::size_t channels, Activation act) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.channels = channels;
    s.act = act;
    return s;
}
LayerSpec LayerSpec::maxpool2d() {
    LayerSpec s;
    s.kind = LayerKind::maxpool2d;
    return s;
}
LayerSpec LayerSpec::upsample2d() {
    LayerSpec s;
    s.kind = LayerKind::upsample2d;
    return s;
}
LayerSpec LayerSpec::flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
}
LayerSpec LayerSpec::reshape(std::size_t h, std::size_t w, std::size_t c) {
    LayerSpec s;
    s.kind = LayerKind::reshape;
    s.target = {h, w, c};
    return s;
}

LayerSpec LayerSpec::parse(const std::string& token) {
    const auto at = token.find('@');
    const std::string head = token.substr(0, at);
    const Activation act =
        at == std::string::npos ? Activation::elu : activation_from_name(token.substr(at + 1));

    const auto colon = head.find(':');
    const std::string name = head.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : head.substr(colon + 1);

    if (name == "dense") {
        if (args.empty()) throw std::invalid_argument("layer spec: dense needs a unit count");
        return dense(std::stoul(args), act);
    }
    if (name == "conv") {
        if (args.empty()) throw std::invalid_argument("layer spec: conv needs a channel count");
        return conv2d(std::stoul(args), act);
    }
    if (name == "pool") return maxpool2d();
    if (name == "up") return upsample2d();
    if (name == "flatten") return flatten();
    if (name == "reshape") {
        std::stringstream ss(args);
        std::size_t h = 0, w = 0, c = 0;
        char comma = 0;
        ss >> h >> comma >> w >> comma >> c;
        if (!ss || h == 0 || w == 0 || c == 0) {
            throw std::invalid_argument("layer spec: reshape needs h,w,c");
        }
        return reshape(h, w, c);
    }
    throw std::invalid_argument("unknown layer spec token: " + token);
}

std::string LayerSpec::to_string() const {
    switch (kind) {
        case LayerKind::dense:
            return "dense:" + std::to_string(units) + "@" + activation_name(act);
        case LayerKind::conv2d:
            return "conv:" + std::to_string(channels) + "@" + activation_name(act);
        case LayerKind::maxpool2d: return "pool";
        case LayerKind::upsample2d: return "up";
        case LayerKind::flatten: return "flatten";
        case LayerKind::reshape:
            return "reshape:" + std::to_string(target[0]) + "," + std::to_string(target[1]) +
                   "," + std::to_string(target[2]);
    }
    throw std::logic_error("unreachable layer kind");
}

std::vector<LayerSpec> parse_layer_stack(const std::string& tokens) {
    std::vector<LayerSpec> specs;
    std::stringstream ss(tokens);
    std::string token;
    while (ss >> token) specs.push_back(LayerSpec::parse(token));
    if (specs.empty()) throw std::invalid_argument("empty layer stack");
    return specs;
}

std::string format_layer_stack(const std::vector<LayerSpec>& specs) {
    std::string out;
    for (const auto& s : specs) {
        if (!out.empty()) out += ' ';
        out += s.to_string();
    }
    return out;
}

namespace {

std::size_t shape_count(const std::vector<std::size_t>& s) { return Tensor::count(s); }

}  // namespace

Network::Network(std::vector<std::size_t> input_shape, std::vector<LayerSpec> specs)
    : input_shape_(std::move(input_shape)), specs_(std::move(specs)) {
    if (input_shape_.empty() || input_shape_.size() > 3) {
        throw std::invalid_argument("Network: input shape must have rank 1..3");
    }
    std::vector<std::size_t> shape = input_shape_;
    std::size_t offset = 0;
    for (const LayerSpec& spec : specs_) {
        Compiled layer;
        layer.spec = spec;
        layer.in_shape = shape;
        switch (spec.kind) {
            case LayerKind::dense: {
                if (shape.size() != 1) {
                    throw std::invalid_argument("dense layer requires a flat input");
                }
                if (spec.units == 0) throw std::invalid_argument("dense layer with zero units");
                layer.weight_count = spec.units * shape[0];
                layer.bias_count = spec.units;
                shape = {spec.units};
                break;
            }
            case LayerKind::conv2d: {
                if (shape.size() != 3) {
                    throw std::invalid_argument("conv layer requires an image input");
                }
                if (spec.channels == 0) throw std::invalid_argument("conv layer with zero channels");
                layer.weight_count = 9 * shape[2] * spec.channels;
                layer.bias_count = spec.channels;
                shape = {shape[0], shape[1], spec.channels};
                break;
            }
            case LayerKind::maxpool2d: {
                if (shape.size() != 3) throw std::invalid_argument("pool requires an image input");
                if (shape[0] % 2 != 0 || shape[1] % 2 != 0) {
                    throw std::invalid_argument("pool requires even spatial dimensions");
                }
                shape = {shape[0] / 2, shape[1] / 2, shape[2]};
                break;
            }
            case LayerKind::upsample2d: {
                if (shape.size() != 3) {
                    throw std::invalid_argument("upsample requires an image input");
                }
                shape = {shape[0] * 2, shape[1] * 2, shape[2]};
                break;
            }
            case LayerKind::flatten: {
                shape = {shape_count(shape)};
                break;
            }
            case LayerKind::reshape: {
                if (shape.size() != 1 || shape[0] != spec.target[0] * spec.target[1] * spec.target[2]) {
                    throw std::invalid_argument("reshape target does not match input length");
                }
                shape = {spec.target[0], spec.target[1], spec.target[2]};
                break;
            }
        }
        layer.param_offset = offset;
        offset += layer.weight_count + layer.bias_count;
        layer.out_shape = shape;
        layers_.push_back(std::move(layer));
    }
    params_.assign(offset, 0.0);
}

std::vector<std::size_t> Network::output_shape() const {
    return layers_.empty() ? input_shape_ : layers_.back().out_shape;
}

void Network::init_glorot(std::uint64_t seed) {
    Rng rng(seed);
    for (const Compiled& layer : layers_) {
        if (layer.weight_count == 0) continue;
        std::size_t fan_in = 0, fan_out = 0;
        if (layer.spec.kind == LayerKind::dense) {
            fan_in = layer.in_shape[0];
            fan_out = layer.spec.units;
        } else {
            fan_in = 9 * layer.in_shape[2];
            fan_out = 9 * layer.spec.channels;
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (std::size_t i = 0; i < layer.weight_count; ++i) {
            params_[layer.param_offset + i] = rng.uniform(-limit, limit);
        }
        for (std::size_t i = 0; i < layer.bias_count; ++i) {
            params_[layer.param_offset + layer.weight_count + i] = 0.0;
        }
    }
}

Tensor Network::forward(const Tensor& x) const { return run(x, nullptr); }

Tensor Network::forward(const Tensor& x, NetworkCache& cache) const {
    cache.acts.clear();
    cache.pre.clear();
    cache.argmax.clear();
    return run(x, &cache);
}

Tensor Network::run(const Tensor& x, NetworkCache* cache) const {
    if (x.shape.size() != input_shape_.size() + 1) {
        throw std::invalid_argument("Network::forward: missing batch dimension");
    }
    for (std::size_t d = 0; d < input_shape_.size(); ++d) {
        if (x.shape[d + 1] != input_shape_[d]) {
            throw std::invalid_argument("Network::forward: input shape mismatch");
        }
    }

    const std::size_t batch = x.batch();
    Tensor cur = x;
    if (cache) cache->acts.push_back(cur);

    for (const Compiled& layer : layers_) {
        std::vector<std::size_t> out_shape = layer.out_shape;
        out_shape.insert(out_shape.begin(), batch);
        Tensor out(out_shape);
        Tensor pre;
        std::vector<std::size_t> argmax;

        const double* w = params_.data() + layer.param_offset;
        const double* b = w + layer.weight_count;

        switch (layer.spec.kind) {
            case LayerKind::dense: {
                const std::size_t in_f = layer.in_shape[0];
                const std::size_t out_f = layer.spec.units;
                pre = Tensor(out.shape);
                for (std::size_t n = 0; n < batch; ++n) {
                    const double* xi = cur.item(n);
                    double* zi = pre.item(n);
                    for (std::size_t o = 0; o < out_f; ++o) {
                        const double* wo = w + o * in_f;
                        double s = b[o];
                        for (std::size_t i = 0; i < in_f; ++i) s += wo[i] * xi[i];
                        zi[o] = s;
                    }
                    activation_forward(layer.spec.act, {zi, out_f}, {out.item(n), out_f});
                }
                break;
            }
            case LayerKind::conv2d: {
                const std::size_t h = layer.in_shape[0], wd = layer.in_shape[1];
                const std::size_t ic = layer.in_shape[2], oc = layer.spec.channels;
                pre = Tensor(out.shape);
                for (std::size_t n = 0; n < batch; ++n) {
                    const double* xi = cur.item(n);
                    double* zi = pre.item(n);
                    for (std::size_t y = 0; y < h; ++y) {
                        for (std::size_t xcol = 0; xcol < wd; ++xcol) {
                            double* zp = zi + (y * wd + xcol) * oc;
                            for (std::size_t o = 0; o < oc; ++o) zp[o] = b[o];
                            for (std::size_t ky = 0; ky < 3; ++ky) {
                                const std::ptrdiff_t sy =
                                    static_cast<std::ptrdiff_t>(y + ky) - 1;
                                if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
                                for (std::size_t kx = 0; kx < 3; ++kx) {
                                    const std::ptrdiff_t sx =
                                        static_cast<std::ptrdiff_t>(xcol + kx) - 1;
                                    if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(wd)) continue;
                                    const double* xp =
                                        xi + (static_cast<std::size_t>(sy) * wd +
                                              static_cast<std::size_t>(sx)) *
                                                 ic;
                                    const double* wk = w + (ky * 3 + kx) * ic * oc;
                                    for (std::size_t i = 0; i < ic; ++i) {
                                        const double xv = xp[i];
                                        const double* wi = wk + i * oc;
                                        for (std::size_t o = 0; o < oc; ++o) zp[o] += xv * wi[o];
                                    }
                                }
                            }
                        }
                    }
                    activation_forward(layer.spec.act, {zi, out.item_size()},
                                       {out.item(n), out.item_size()});
                }
                break;
            }
            case LayerKind::maxpool2d: {
                const std::size_t h = layer.in_shape[0], wd = layer.in_shape[1];
                const std::size_t c = layer.in_shape[2];
                argmax.resize(out.size());
                for (std::size_t n = 0; n < batch; ++n) {
                    const double* xi = cur.item(n);
                    double* oi = out.item(n);
                    for (std::size_t y = 0; y < h / 2; ++y) {
                        for (std::size_t xcol = 0; xcol < wd / 2; ++xcol) {
                            for (std::size_t ch = 0; ch < c; ++ch) {
                                double best = -std::numeric_limits<double>::infinity();
                                std::size_t best_idx = 0;
                                for (std::size_t dy = 0; dy < 2; ++dy) {
                                    for (std::size_t dx = 0; dx < 2; ++dx) {
                                        const std::size_t idx =
                                            ((2 * y + dy) * wd + 2 * xcol + dx) * c + ch;
                                        if (xi[idx] > best) {
                                            best = xi[idx];
                                            best_idx = idx;
                                        }
                                    }
                                }
                                const std::size_t oidx = (y * (wd / 2) + xcol) * c + ch;
                                oi[oidx] = best;
                                argmax[n * out.item_size() + oidx] = best_idx;
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::upsample2d: {
                const std::size_t h = layer.in_shape[0], wd = layer.in_shape[1];
                const std::size_t c = layer.in_shape[2];
                for (std::size_t n = 0; n < batch; ++n) {
                    const double* xi = cur.item(n);
                    double* oi = out.item(n);
                    for (std::size_t y = 0; y < 2 * h; ++y) {
                        for (std::size_t xcol = 0; xcol < 2 * wd; ++xcol) {
                            const double* src = xi + ((y / 2) * wd + xcol / 2) * c;
                            double* dst = oi + (y * 2 * wd + xcol) * c;
                            for (std::size_t ch = 0; ch < c; ++ch) dst[ch] = src[ch];
                        }
                    }
                }
                break;
            }
            case LayerKind::flatten:
            case LayerKind::reshape: {
                out.data = cur.data;
                break;
            }
        }

        if (cache) {
            cache->pre.push_back(std::move(pre));
            cache->argmax.push_back(std::move(argmax));
            cache->acts.push_back(out);
        }
        cur = std::move(out);
    }
    return cur;
}

Tensor Network::backward(const Tensor& grad_out, const NetworkCache& cache,
                         std::span<double> param_grads) const {
    if (param_grads.size() != params_.size()) {
        throw std::invalid_argument("Network::backward: gradient buffer size mismatch");
    }
    if (cache.acts.size() != layers_.size() + 1) {
        throw std::invalid_argument("Network::backward: stale cache");
    }

    Tensor grad = grad_out;
    const std::size_t batch = grad.batch();

    for (std::size_t li = layers_.size(); li-- > 0;) {
        const Compiled& layer = layers_[li];
        const Tensor& input = cache.acts[li];
        const Tensor& output = cache.acts[li + 1];

        std::vector<std::size_t> in_shape = layer.in_shape;
        in_shape.insert(in_shape.begin(), batch);
        Tensor grad_in(in_shape);

        double* wg = param_grads.data() + layer.param_offset;
        double* bg = wg + layer.weight_count;
        const double* w = params_.data() + layer.param_offset;

        switch (layer.spec.kind) {
            case LayerKind::dense: {
                const std::size_t in_f = layer.in_shape[0];
                const std::size_t out_f = layer.spec.units;
                std::vector<double> dz(out_f);
                const Tensor& pre = cache.pre[li];
                for (std::size_t n = 0; n < batch; ++n) {
                    activation_backward(layer.spec.act, {pre.item(n), out_f},
                                        {output.item(n), out_f}, {grad.item(n), out_f}, dz);
                    const double* xi = input.item(n);
                    double* gi = grad_in.item(n);
                    for (std::size_t o = 0; o < out_f; ++o) {
                        const double d = dz[o];
                        bg[o] += d;
                        double* wgo = wg + o * in_f;
                        const double* wo = w + o * in_f;
                        for (std::size_t i = 0; i < in_f; ++i) {
                            wgo[i] += d * xi[i];
                            gi[i] += d * wo[i];
                        }
                    }
                }
                break;
            }
            case LayerKind::conv2d: {
                const std::size_t h = layer.in_shape[0], wd = layer.in_shape[1];
                const std::size_t ic = layer.in_shape[2], oc = layer.spec.channels;
                const Tensor& pre = cache.pre[li];
                std::vector<double> dz(output.item_size());
                for (std::size_t n = 0; n < batch; ++n) {
                    activation_backward(layer.spec.act, {pre.item(n), dz.size()},
                                        {output.item(n), dz.size()}, {grad.item(n), dz.size()},
                                        dz);
                    const double* xi = input.item(n);
                    double* gi = grad_in.item(n);
                    for (std::size_t y = 0; y < h; ++y) {
                        for (std::size_t xcol = 0; xcol < wd; ++xcol) {
                            const double* dzp = dz.data() + (y * wd + xcol) * oc;
                            for (std::size_t o = 0; o < oc; ++o) bg[o] += dzp[o];
                            for (std::size_t ky = 0; ky < 3; ++ky) {
                                const std::ptrdiff_t sy =
                                    static_cast<std::ptrdiff_t>(y + ky) - 1;
                                if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
                                for (std::size_t kx = 0; kx < 3; ++kx) {
                                    const std::ptrdiff_t sx =
                                        static_cast<std::ptrdiff_t>(xcol + kx) - 1;
                                    if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(wd)) continue;
                                    const std::size_t src =
                                        (static_cast<std::size_t>(sy) * wd +
                                         static_cast<std::size_t>(sx)) *
                                        ic;
                                    double* wgk = wg + (ky * 3 + kx) * ic * oc;
                                    const double* wk = w + (ky * 3 + kx) * ic * oc;
                                    for (std::size_t i = 0; i < ic; ++i) {
                                        const double xv = xi[src + i];
                                        double gx = 0.0;
                                        double* wgi = wgk + i * oc;
                                        const double* wi = wk + i * oc;
                                        for (std::size_t o = 0; o < oc; ++o) {
                                            wgi[o] += xv * dzp[o];
                                            gx += wi[o] * dzp[o];
                                        }
                                        gi[src + i] += gx;
                                    }
                                }
                            }
                        }
                    }
                }
                break;
            }
            case LayerKind::maxpool2d: {
                const auto& argmax = cache.argmax[li];
                for (std::size_t n = 0; n < batch; ++n) {
                    const double* gout = grad.item(n);
                    double* gi = grad_in.item(n);
                    for (std::size_t o = 0; o < output.item_size(); ++o) {
                        gi[argmax[n * output.item_size() + o]] += gout[o];
                    }
                }
                break;
            }
            case LayerKind::upsample2d: {
                const std::size_t h = layer.in_shape[0], wd = layer.in_shape[1];
                const std::size_t c = layer.in_shape[2];
                for (std::size_t n = 0; n < batch; ++n) {
                    const double* gout = grad.item(n);
                    double* gi = grad_in.item(n);
                    for (std::size_t y = 0; y < 2 * h; ++y) {
                        for (std::size_t xcol = 0; xcol < 2 * wd; ++xcol) {
                            const double* src = gout + (y * 2 * wd + xcol) * c;
                            double* dst = gi + ((y / 2) * wd + xcol / 2) * c;
                            for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
                        }
                    }
                }
                break;
            }
            case LayerKind::flatten:
            case LayerKind::reshape: {
                grad_in.data = grad.data;
                break;
            }
        }
        grad = std::move(grad_in);
    }
    return grad;
}

}  // namespace fastsvd
