#include "fastsvd/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fastsvd {

double max_fd_discrepancy(std::span<double> params, std::span<const double> analytic_grad,
                          const std::function<double()>& loss_value, double step) {
    double grad_scale = 0.0;
    for (double g : analytic_grad) grad_scale = std::max(grad_scale, std::fabs(g));

    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        const double up = loss_value();
        params[i] = saved - step;
        const double down = loss_value();
        params[i] = saved;

        const double fd = (up - down) / (2.0 * step);
        const double a = analytic_grad[i];
        const double diff = std::fabs(a - fd);
        // Tiny gradients drown in finite-difference roundoff; measure those
        // against the overall gradient scale instead of their own magnitude.
        const double denom = std::max({std::fabs(a), std::fabs(fd), 1e-6 * grad_scale, 1e-12});
        worst = std::max(worst, diff / denom);
    }
    return worst;
}

double grad_check(Network& net, const Tensor& input, const Tensor& target) {
    NetworkCache cache;
    Tensor out = net.forward(input, cache);
    if (out.size() != target.size()) {
        throw std::invalid_argument("grad_check: target shape mismatch");
    }
    Tensor dout(out.shape);
    for (std::size_t i = 0; i < out.size(); ++i) dout.data[i] = 2.0 * (out.data[i] - target.data[i]);
    std::vector<double> analytic(net.param_count(), 0.0);
    net.backward(dout, cache, analytic);

    auto loss = [&]() {
        const Tensor y = net.forward(input);
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double d = y.data[i] - target.data[i];
            s += d * d;
        }
        return s;
    };
    return max_fd_discrepancy(net.params(), analytic, loss);
}

}  // namespace fastsvd
