#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fastsvd {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected ADAM with per-parameter first/second moment accumulators.
class AdamState {
public:
    AdamState(std::size_t n_params, AdamOptions options);

    /// One update; params and grads must match the accumulator size.
    void step(std::span<double> params, std::span<const double> grads);

    void set_lr(double lr) { options_.lr = lr; }
    double lr() const { return options_.lr; }
    long step_count() const { return step_count_; }

private:
    AdamOptions options_;
    long step_count_ = 0;
    std::vector<double> first_;
    std::vector<double> second_;
};

/// Learning-rate schedule evaluated per epoch: constant or cosine decay from
/// lr down to floor_fraction * lr across the epoch budget.
double scheduled_lr(double lr, bool cosine, std::size_t epoch, std::size_t total_epochs,
                    double floor_fraction = 0.02);

}  // namespace fastsvd
