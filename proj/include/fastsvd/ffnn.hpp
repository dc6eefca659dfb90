#pragma once

#include <cstdint>
#include <vector>

#include "fastsvd/cae.hpp"
#include "fastsvd/matrix.hpp"
#include "fastsvd/network.hpp"

namespace fastsvd {

/// Dense regressor mapping [t, mu] to a latent vector; hidden layers share
/// one activation (the NAS search dimension), the output layer is linear.
struct FfnnModel {
    Network net;
    Activation hidden_activation = Activation::leaky_relu;
};

FfnnModel make_ffnn(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                    std::size_t output_dim, Activation activation);

/// inputs: input_dim x N, targets: output_dim x N (columns are samples).
TrainReport train_ffnn(FfnnModel& model, const Matrix& inputs, const Matrix& targets,
                       const TrainOptions& options);

/// Mean over columns of ||target - prediction||^2.
double ffnn_dataset_loss(const FfnnModel& model, const Matrix& inputs, const Matrix& targets);

std::vector<double> ffnn_predict(const FfnnModel& model, std::span<const double> input);

}  // namespace fastsvd
