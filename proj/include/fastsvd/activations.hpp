#pragma once

#include <span>
#include <string>

namespace fastsvd {

enum class Activation {
    linear,
    sigmoid,
    tanh,
    relu,
    leaky_relu,  // slope 0.01
    elu,         // alpha 1
    swish,
    softmax,
};

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation act);

/// Elementwise forward; softmax treats the span as a single row.
void activation_forward(Activation act, std::span<const double> x, std::span<double> y);

/// Derivative of an elementwise activation at x. Softmax has no elementwise
/// derivative and is rejected here; its Jacobian lives in the layer backward.
double activation_derivative(Activation act, double x);

/// dL/dz from dL/dy given pre-activation z and output y (handles softmax).
void activation_backward(Activation act, std::span<const double> z, std::span<const double> y,
                         std::span<const double> dy, std::span<double> dz);

}  // namespace fastsvd
