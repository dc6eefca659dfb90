#pragma once

#include <functional>
#include <span>

#include "fastsvd/network.hpp"

namespace fastsvd {

/// Max relative discrepancy between an analytic gradient and central finite
/// differences of `loss_value` over `params` (step 1e-5). `loss_value` is
/// re-evaluated with the perturbed parameters in place.
double max_fd_discrepancy(std::span<double> params, std::span<const double> analytic_grad,
                          const std::function<double()>& loss_value, double step = 1e-5);

/// Finite-difference check of a network's backward pass under the summed
/// squared-error loss ||out - target||^2. Returns the max relative error.
double grad_check(Network& net, const Tensor& input, const Tensor& target);

}  // namespace fastsvd
