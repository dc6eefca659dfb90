#include "fastsvd/activations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fastsvd {

namespace {
constexpr double kLeakySlope = 0.01;
constexpr double kEluAlpha = 1.0;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

Activation activation_from_name(const std::string& name) {
    if (name == "linear") return Activation::linear;
    if (name == "sigmoid") return Activation::sigmoid;
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    if (name == "leaky_relu") return Activation::leaky_relu;
    if (name == "elu") return Activation::elu;
    if (name == "swish") return Activation::swish;
    if (name == "softmax") return Activation::softmax;
    throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_name(Activation act) {
    switch (act) {
        case Activation::linear: return "linear";
        case Activation::sigmoid: return "sigmoid";
        case Activation::tanh: return "tanh";
        case Activation::relu: return "relu";
        case Activation::leaky_relu: return "leaky_relu";
        case Activation::elu: return "elu";
        case Activation::swish: return "swish";
        case Activation::softmax: return "softmax";
    }
    throw std::logic_error("unreachable activation");
}

void activation_forward(Activation act, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("activation_forward: size mismatch");
    switch (act) {
        case Activation::linear:
            std::copy(x.begin(), x.end(), y.begin());
            return;
        case Activation::sigmoid:
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = sigmoid(x[i]);
            return;
        case Activation::tanh:
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
            return;
        case Activation::relu:
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
            return;
        case Activation::leaky_relu:
            for (std::size_t i = 0; i < x.size(); ++i)
                y[i] = x[i] > 0.0 ? x[i] : kLeakySlope * x[i];
            return;
        case Activation::elu:
            for (std::size_t i = 0; i < x.size(); ++i)
                y[i] = x[i] > 0.0 ? x[i] : kEluAlpha * (std::exp(x[i]) - 1.0);
            return;
        case Activation::swish:
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * sigmoid(x[i]);
            return;
        case Activation::softmax: {
            double xmax = x[0];
            for (double v : x) xmax = std::max(xmax, v);
            double sum = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                y[i] = std::exp(x[i] - xmax);
                sum += y[i];
            }
            for (std::size_t i = 0; i < x.size(); ++i) y[i] /= sum;
            return;
        }
    }
}

double activation_derivative(Activation act, double x) {
    switch (act) {
        case Activation::linear: return 1.0;
        case Activation::sigmoid: {
            const double s = sigmoid(x);
            return s * (1.0 - s);
        }
        case Activation::tanh: {
            const double t = std::tanh(x);
            return 1.0 - t * t;
        }
        case Activation::relu: return x > 0.0 ? 1.0 : 0.0;
        case Activation::leaky_relu: return x > 0.0 ? 1.0 : kLeakySlope;
        case Activation::elu: return x > 0.0 ? 1.0 : kEluAlpha * std::exp(x);
        case Activation::swish: {
            const double s = sigmoid(x);
            return s * (1.0 + x * (1.0 - s));
        }
        case Activation::softmax:
            throw std::invalid_argument("softmax has no elementwise derivative");
    }
    throw std::logic_error("unreachable activation");
}

void activation_backward(Activation act, std::span<const double> z, std::span<const double> y,
                         std::span<const double> dy, std::span<double> dz) {
    if (act == Activation::softmax) {
        double inner = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) inner += dy[i] * y[i];
        for (std::size_t i = 0; i < y.size(); ++i) dz[i] = y[i] * (dy[i] - inner);
        return;
    }
    for (std::size_t i = 0; i < z.size(); ++i) dz[i] = dy[i] * activation_derivative(act, z[i]);
}

}  // namespace fastsvd
