#include "fastsvd/adam.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fastsvd {

AdamState::AdamState(std::size_t n_params, AdamOptions options)
    : options_(options), first_(n_params, 0.0), second_(n_params, 0.0) {}

void AdamState::step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != first_.size() || grads.size() != first_.size()) {
        throw std::invalid_argument("AdamState::step: size mismatch");
    }
    ++step_count_;
    const double b1 = options_.beta1, b2 = options_.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        first_[i] = b1 * first_[i] + (1.0 - b1) * g;
        second_[i] = b2 * second_[i] + (1.0 - b2) * g * g;
        const double mhat = first_[i] / bc1;
        const double vhat = second_[i] / bc2;
        params[i] -= options_.lr * mhat / (std::sqrt(vhat) + options_.eps);
    }
}

double scheduled_lr(double lr, bool cosine, std::size_t epoch, std::size_t total_epochs,
                    double floor_fraction) {
    if (!cosine || total_epochs <= 1) return lr;
    const double progress = static_cast<double>(epoch) / static_cast<double>(total_epochs - 1);
    const double scale =
        floor_fraction + (1.0 - floor_fraction) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    return lr * scale;
}

}  // namespace fastsvd
