#pragma once

#include <string>
#include <vector>

#include "fastsvd/ffnn.hpp"

namespace fastsvd {

struct NasTrial {
    std::string activation;
    double train_loss = 0.0;
    double val_loss = 0.0;
    bool diverged = false;
};

struct NasReport {
    std::vector<NasTrial> trials;
    std::size_t winner_index = 0;
    std::string winner;
};

struct NasOptions {
    std::vector<std::size_t> hidden = {50};
    TrainOptions train;
};

/// Multi-trial activation search: one FFNN per candidate is trained
/// independently under the same seed protocol; the winner is the minimum
/// validation loss (ties: lower training loss, then candidate order).
/// Throws if every trial diverges.
NasReport nas_search(const std::vector<std::string>& candidates, const Matrix& inputs,
                     const Matrix& targets, const NasOptions& options);

/// CSV columns: activation, train_loss, val_loss, winner (0/1).
void write_nas_csv(const std::string& path, const NasReport& report);

}  // namespace fastsvd
