#include "fastsvd/ffnn.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "fastsvd/adam.hpp"
#include "fastsvd/rng.hpp"

namespace fastsvd {

FfnnModel make_ffnn(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                    std::size_t output_dim, Activation activation) {
    std::vector<LayerSpec> specs;
    for (std::size_t units : hidden) specs.push_back(LayerSpec::dense(units, activation));
    specs.push_back(LayerSpec::dense(output_dim, Activation::linear));
    FfnnModel model;
    model.net = Network({input_dim}, std::move(specs));
    model.hidden_activation = activation;
    return model;
}

std::vector<double> ffnn_predict(const FfnnModel& model, std::span<const double> input) {
    Tensor x({1, input.size()});
    std::copy(input.begin(), input.end(), x.data.begin());
    return model.net.forward(x).data;
}

TrainReport train_ffnn(FfnnModel& model, const Matrix& inputs, const Matrix& targets,
                       const TrainOptions& options) {
    if (inputs.empty()) throw std::invalid_argument("train_ffnn: empty dataset");
    if (inputs.cols() != targets.cols()) {
        throw std::invalid_argument("train_ffnn: input/target sample counts differ");
    }
    const std::size_t in_dim = inputs.rows();
    const std::size_t out_dim = targets.rows();

    Rng rng(options.seed);
    std::vector<std::size_t> order(inputs.cols());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t val_count =
        static_cast<std::size_t>(static_cast<double>(order.size()) * options.val_fraction);
    std::vector<std::size_t> train_idx(order.begin(),
                                       order.end() - static_cast<std::ptrdiff_t>(val_count));
    std::vector<std::size_t> val_idx(order.end() - static_cast<std::ptrdiff_t>(val_count),
                                     order.end());
    if (train_idx.empty()) throw std::invalid_argument("train_ffnn: no training samples");

    AdamState adam(model.net.param_count(), {.lr = options.lr});
    std::vector<double> grads(model.net.param_count());

    TrainReport report;
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        adam.set_lr(scheduled_lr(options.lr, options.cosine_decay, epoch, options.epochs));
        rng.shuffle(train_idx);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += options.batch) {
            const std::size_t bsz = std::min(options.batch, train_idx.size() - start);

            Tensor x({bsz, in_dim});
            for (std::size_t b = 0; b < bsz; ++b) {
                const double* src = inputs.col(train_idx[start + b]);
                std::copy(src, src + in_dim, x.item(b));
            }

            NetworkCache cache;
            const Tensor y = model.net.forward(x, cache);
            Tensor dy(y.shape);
            for (std::size_t b = 0; b < bsz; ++b) {
                const double* target = targets.col(train_idx[start + b]);
                for (std::size_t o = 0; o < out_dim; ++o) {
                    const double d = y.item(b)[o] - target[o];
                    epoch_loss += d * d;
                    dy.item(b)[o] = 2.0 * d / static_cast<double>(bsz);
                }
            }

            std::fill(grads.begin(), grads.end(), 0.0);
            model.net.backward(dy, cache, grads);
            adam.step(model.net.params(), grads);
        }
        report.train_loss.push_back(epoch_loss / static_cast<double>(train_idx.size()));

        if (!val_idx.empty()) {
            double val = 0.0;
            for (std::size_t idx : val_idx) {
                const auto y = ffnn_predict(model, inputs.col_span(idx));
                for (std::size_t o = 0; o < out_dim; ++o) {
                    const double d = y[o] - targets(o, idx);
                    val += d * d;
                }
            }
            report.val_loss.push_back(val / static_cast<double>(val_idx.size()));
        } else {
            report.val_loss.push_back(report.train_loss.back());
        }
    }
    return report;
}

double ffnn_dataset_loss(const FfnnModel& model, const Matrix& inputs, const Matrix& targets) {
    if (inputs.empty()) throw std::invalid_argument("ffnn_dataset_loss: empty dataset");
    double total = 0.0;
    for (std::size_t j = 0; j < inputs.cols(); ++j) {
        const auto y = ffnn_predict(model, inputs.col_span(j));
        for (std::size_t o = 0; o < y.size(); ++o) {
            const double d = y[o] - targets(o, j);
            total += d * d;
        }
    }
    return total / static_cast<double>(inputs.cols());
}

}  // namespace fastsvd
