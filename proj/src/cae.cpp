#include "fastsvd/cae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fastsvd/adam.hpp"
#include "fastsvd/rng.hpp"

namespace fastsvd {

Tensor reshape_to_image(std::span<const double> values, std::size_t side, std::size_t channels) {
    if (channels == 0) throw std::invalid_argument("reshape_to_image: channels must be >= 1");
    if (values.size() % channels != 0) {
        throw std::invalid_argument("reshape_to_image: length not divisible by channels");
    }
    const std::size_t per_channel = values.size() / channels;
    if (side * side < per_channel) {
        throw std::invalid_argument("reshape_to_image: side too small for the data");
    }
    Tensor image({1, side, side, channels});
    for (std::size_t c = 0; c < channels; ++c) {
        for (std::size_t i = 0; i < per_channel; ++i) {
            image.data[i * channels + c] = values[c * per_channel + i];
        }
    }
    return image;
}

std::vector<double> flatten_image(const Tensor& image, std::size_t per_channel) {
    if (image.shape.size() != 4) throw std::invalid_argument("flatten_image: image tensor expected");
    const std::size_t channels = image.shape[3];
    const std::size_t pixels = image.shape[1] * image.shape[2];
    if (pixels < per_channel) throw std::invalid_argument("flatten_image: image too small");
    std::vector<double> out(channels * per_channel);
    for (std::size_t c = 0; c < channels; ++c)
        for (std::size_t i = 0; i < per_channel; ++i)
            out[c * per_channel + i] = image.data[i * channels + c];
    return out;
}

CaeModel::CaeModel(std::size_t input_len, std::size_t channels, std::size_t side, std::size_t q,
                   std::vector<LayerSpec> encoder_specs, std::vector<LayerSpec> decoder_specs)
    : input_len_(input_len), channels_(channels), side_(side), q_(q) {
    if (side_ * side_ < input_len_) {
        throw std::invalid_argument("CaeModel: side too small for input length");
    }
    encoder_ = Network({side_, side_, channels_}, std::move(encoder_specs));
    decoder_ = Network({q_}, std::move(decoder_specs));
    if (encoder_.output_shape() != std::vector<std::size_t>{q_}) {
        throw std::invalid_argument("CaeModel: encoder output length must equal q");
    }
    if (decoder_.output_shape() != std::vector<std::size_t>{side_, side_, channels_}) {
        throw std::invalid_argument("CaeModel: decoder must emit the input image shape");
    }
}

void CaeModel::init_weights(std::uint64_t seed) {
    encoder_.init_glorot(seed);
    decoder_.init_glorot(seed + 1);
}

std::vector<double> CaeModel::encode(std::span<const double> u) const {
    if (u.size() != channels_ * input_len_) {
        throw std::invalid_argument("CaeModel::encode: input length mismatch");
    }
    const Tensor z = encoder_.forward(reshape_to_image(u, side_, channels_));
    return z.data;
}

std::vector<double> CaeModel::decode(std::span<const double> z) const {
    if (z.size() != q_) throw std::invalid_argument("CaeModel::decode: latent length mismatch");
    Tensor zin({1, q_});
    std::copy(z.begin(), z.end(), zin.data.begin());
    return flatten_image(decoder_.forward(zin), input_len_);
}

Matrix CaeModel::encode_all(const Matrix& samples) const {
    Matrix latents(q_, samples.cols());
    for (std::size_t j = 0; j < samples.cols(); ++j) {
        latents.set_col(j, encode(samples.col_span(j)));
    }
    return latents;
}

std::size_t default_cae_side(std::size_t input_len) {
    std::size_t side = 4;
    while (side * side < input_len) side *= 2;
    return side;
}

std::vector<LayerSpec> default_encoder_stack(std::size_t q) {
    auto specs = parse_layer_stack(
        "conv:25@elu pool conv:10@elu pool flatten dense:20@elu dense:10@elu");
    specs.push_back(LayerSpec::dense(q, Activation::linear));
    return specs;
}

std::vector<LayerSpec> default_decoder_stack(std::size_t side, std::size_t channels) {
    if (side < 4 || (side & (side - 1)) != 0) {
        throw std::invalid_argument("default_decoder_stack: side must be a power of two >= 4");
    }
    auto specs = parse_layer_stack("dense:10@elu dense:20@elu dense:12@elu reshape:2,2,3");
    std::size_t cur = 2;
    std::size_t conv_channels = 10;
    while (cur < side) {
        specs.push_back(LayerSpec::conv2d(conv_channels, Activation::elu));
        specs.push_back(LayerSpec::upsample2d());
        conv_channels = (conv_channels == 10) ? 25 : 30;
        cur *= 2;
    }
    specs.push_back(LayerSpec::conv2d(channels, Activation::linear));
    return specs;
}

namespace {

// Gather sample columns into one batched image tensor.
Tensor batch_images(const Matrix& samples, std::span<const std::size_t> indices,
                    std::size_t side, std::size_t channels, std::size_t input_len) {
    Tensor batch({indices.size(), side, side, channels});
    const std::size_t item = batch.item_size();
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const Tensor img = reshape_to_image(samples.col_span(indices[b]), side, channels);
        std::copy(img.data.begin(), img.data.end(), batch.data.begin() + b * item);
    }
    return batch;
}

}  // namespace

TrainReport train_cae(CaeModel& model, const Matrix& samples, const TrainOptions& options) {
    if (samples.empty()) throw std::invalid_argument("train_cae: empty dataset");
    if (samples.rows() != model.channels() * model.input_len()) {
        throw std::invalid_argument("train_cae: sample length mismatch");
    }
    const std::size_t n_samples = samples.cols();
    const std::size_t side = model.side();
    const std::size_t channels = model.channels();
    const std::size_t input_len = model.input_len();

    Rng rng(options.seed);
    std::vector<std::size_t> order(n_samples);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t val_count =
        static_cast<std::size_t>(static_cast<double>(n_samples) * options.val_fraction);
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.end() - static_cast<std::ptrdiff_t>(val_count));
    std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(val_count),
                                     order.end());

    Network& enc = model.encoder();
    Network& dec = model.decoder();
    const std::size_t n_enc = enc.param_count();
    const std::size_t n_dec = dec.param_count();
    AdamState adam_enc(n_enc, {.lr = options.lr});
    AdamState adam_dec(n_dec, {.lr = options.lr});
    std::vector<double> grad_enc(n_enc), grad_dec(n_dec);

    TrainReport report;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        const double lr = scheduled_lr(options.lr, options.cosine_decay, epoch, options.epochs);
        adam_enc.set_lr(lr);
        adam_dec.set_lr(lr);
        rng.shuffle(train_idx);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += options.batch) {
            const std::size_t bsz = std::min(options.batch, train_idx.size() - start);
            std::span<const std::size_t> batch_ids(train_idx.data() + start, bsz);
            const Tensor x = batch_images(samples, batch_ids, side, channels, input_len);

            NetworkCache enc_cache, dec_cache;
            const Tensor z = enc.forward(x, enc_cache);
            const Tensor y = dec.forward(z, dec_cache);

            // Loss on the data entries only; padded pixels carry no gradient.
            Tensor dy(y.shape);
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < bsz; ++b) {
                const double* target = samples.col(batch_ids[b]);
                const double* yi = y.item(b);
                double* di = dy.item(b);
                for (std::size_t c = 0; c < channels; ++c) {
                    for (std::size_t i = 0; i < input_len; ++i) {
                        const double pred = yi[i * channels + c];
                        const double diff = pred - target[c * input_len + i];
                        batch_loss += diff * diff;
                        di[i * channels + c] = 2.0 * diff / static_cast<double>(bsz);
                    }
                }
            }
            epoch_loss += batch_loss;

            std::fill(grad_enc.begin(), grad_enc.end(), 0.0);
            std::fill(grad_dec.begin(), grad_dec.end(), 0.0);
            const Tensor dz = dec.backward(dy, dec_cache, grad_dec);
            enc.backward(dz, enc_cache, grad_enc);
            adam_dec.step(dec.params(), grad_dec);
            adam_enc.step(enc.params(), grad_enc);
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));

        if (!val_idx.empty()) {
            double val = 0.0;
            for (std::size_t idx : val_idx) {
                const auto u = samples.col_span(idx);
                const auto rec = model.decode(model.encode(u));
                for (std::size_t i = 0; i < u.size(); ++i) {
                    const double d = rec[i] - u[i];
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

double cae_dataset_loss(const CaeModel& model, const Matrix& samples) {
    if (samples.empty()) throw std::invalid_argument("cae_dataset_loss: empty dataset");
    double total = 0.0;
    for (std::size_t j = 0; j < samples.cols(); ++j) {
        const auto u = samples.col_span(j);
        const auto rec = model.decode(model.encode(u));
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double d = rec[i] - u[i];
            total += d * d;
        }
    }
    return total / static_cast<double>(samples.cols());
}

}  // namespace fastsvd
