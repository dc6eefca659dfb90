#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fastsvd/matrix.hpp"
#include "fastsvd/network.hpp"

namespace fastsvd {

/// Shared by the CAE / LSTM / FFNN trainers.
struct TrainOptions {
    std::size_t epochs = 100;
    std::size_t batch = 8;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    double val_fraction = 0.1;
    bool cosine_decay = false;
};

struct TrainReport {
    std::vector<double> train_loss;  ///< one entry per epoch
    std::vector<double> val_loss;
};

/// Square image (1, side, side, channels) filled row-major from the vector,
/// channel segments of length per_channel each; positions past the data are
/// zero. Throws if side*side < per_channel.
Tensor reshape_to_image(std::span<const double> values, std::size_t side,
                        std::size_t channels = 1);

/// Inverse of reshape_to_image: first per_channel entries of each channel.
std::vector<double> flatten_image(const Tensor& image, std::size_t per_channel);

/// Convolutional autoencoder over SVD-projected snapshots. The caller owns
/// scaling: encode() expects standardized inputs, decode() returns
/// standardized outputs.
class CaeModel {
public:
    CaeModel() = default;
    CaeModel(std::size_t input_len, std::size_t channels, std::size_t side, std::size_t q,
             std::vector<LayerSpec> encoder_specs, std::vector<LayerSpec> decoder_specs);

    void init_weights(std::uint64_t seed);

    std::size_t input_len() const { return input_len_; }
    std::size_t channels() const { return channels_; }
    std::size_t side() const { return side_; }
    std::size_t latent_dim() const { return q_; }

    Network& encoder() { return encoder_; }
    Network& decoder() { return decoder_; }
    const Network& encoder() const { return encoder_; }
    const Network& decoder() const { return decoder_; }

    /// u (standardized, length channels*input_len) -> latent (length q).
    std::vector<double> encode(std::span<const double> u) const;
    /// latent (length q) -> standardized reconstruction (channels*input_len).
    std::vector<double> decode(std::span<const double> z) const;

    /// Columns of `samples` encoded one by one into a q x N matrix.
    Matrix encode_all(const Matrix& samples) const;

private:
    std::size_t input_len_ = 0;
    std::size_t channels_ = 1;
    std::size_t side_ = 0;
    std::size_t q_ = 0;
    Network encoder_;
    Network decoder_;
};

/// Appendix-style default stacks. side == 0 picks the smallest power of two
/// (>= 4) whose square covers input_len.
std::size_t default_cae_side(std::size_t input_len);
std::vector<LayerSpec> default_encoder_stack(std::size_t q);
std::vector<LayerSpec> default_decoder_stack(std::size_t side, std::size_t channels);

/// Minimize the mean squared reconstruction norm over the sample columns
/// (standardized projected snapshots, rows = channels*input_len). The loss
/// is measured on the data entries only, not the zero padding.
TrainReport train_cae(CaeModel& model, const Matrix& samples, const TrainOptions& options);

/// Mean over columns of ||u - decode(encode(u))||^2.
double cae_dataset_loss(const CaeModel& model, const Matrix& samples);

}  // namespace fastsvd
