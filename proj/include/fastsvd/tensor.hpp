#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fastsvd {

/// Row-major value container with up to 4 dimensions. The leading dimension
/// is the batch; the remainder is (features) or (height, width, channels).
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape_)
        : shape(std::move(shape_)), data(count(shape), 0.0) {
        if (shape.empty() || shape.size() > 4) {
            throw std::invalid_argument("Tensor: rank must be 1..4");
        }
    }
    Tensor(std::vector<std::size_t> shape_, std::vector<double> data_)
        : shape(std::move(shape_)), data(std::move(data_)) {
        if (shape.empty() || shape.size() > 4) {
            throw std::invalid_argument("Tensor: rank must be 1..4");
        }
        if (data.size() != count(shape)) {
            throw std::invalid_argument("Tensor: data length does not match shape");
        }
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::size_t size() const { return data.size(); }
    std::size_t batch() const { return shape[0]; }
    /// Elements per batch item.
    std::size_t item_size() const { return shape[0] == 0 ? 0 : data.size() / shape[0]; }

    double* item(std::size_t n) { return data.data() + n * item_size(); }
    const double* item(std::size_t n) const { return data.data() + n * item_size(); }
};

}  // namespace fastsvd
