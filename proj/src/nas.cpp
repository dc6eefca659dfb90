#include "fastsvd/nas.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace fastsvd {

NasReport nas_search(const std::vector<std::string>& candidates, const Matrix& inputs,
                     const Matrix& targets, const NasOptions& options) {
    if (candidates.empty()) throw std::invalid_argument("nas_search: no candidates");

    NasReport report;
    for (const std::string& name : candidates) {
        const Activation act = activation_from_name(name);
        FfnnModel model = make_ffnn(inputs.rows(), options.hidden, targets.rows(), act);
        model.net.init_glorot(options.train.seed);

        NasTrial trial;
        trial.activation = name;
        try {
            const TrainReport tr = train_ffnn(model, inputs, targets, options.train);
            trial.train_loss = tr.train_loss.back();
            trial.val_loss = tr.val_loss.back();
            trial.diverged = !std::isfinite(trial.train_loss) || !std::isfinite(trial.val_loss);
        } catch (const std::exception&) {
            trial.diverged = true;
        }
        report.trials.push_back(std::move(trial));
    }

    bool found = false;
    for (std::size_t i = 0; i < report.trials.size(); ++i) {
        const NasTrial& t = report.trials[i];
        if (t.diverged) continue;
        if (!found) {
            report.winner_index = i;
            found = true;
            continue;
        }
        const NasTrial& best = report.trials[report.winner_index];
        if (t.val_loss < best.val_loss ||
            (t.val_loss == best.val_loss && t.train_loss < best.train_loss)) {
            report.winner_index = i;
        }
    }
    if (!found) {
        std::string names;
        for (const auto& t : report.trials) names += (names.empty() ? "" : ", ") + t.activation;
        throw std::runtime_error("nas_search: all trials diverged (" + names + ")");
    }
    report.winner = report.trials[report.winner_index].activation;
    return report;
}

void write_nas_csv(const std::string& path, const NasReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_nas_csv: cannot open " + path);
    out << "activation,train_loss,val_loss,winner\n";
    out.precision(17);
    for (std::size_t i = 0; i < report.trials.size(); ++i) {
        const NasTrial& t = report.trials[i];
        out << t.activation << ',' << t.train_loss << ',' << t.val_loss << ','
            << (i == report.winner_index ? 1 : 0) << '\n';
    }
}

}  // namespace fastsvd
