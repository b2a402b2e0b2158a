#include "sce/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sce/rng.hpp"

namespace sce {

namespace {

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd logits) {
    const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
    logits.colwise() -= row_max;
    Eigen::MatrixXd probs = logits.array().exp();
    const Eigen::VectorXd row_sum = probs.rowwise().sum();
    probs.array().colwise() /= row_sum.array();
    return probs;
}

Eigen::MatrixXd glorot(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.uniform(-limit, limit);
    }
    return m;
}

void check_labels(const std::vector<int>& labels, Eigen::Index rows, int num_classes) {
    if (static_cast<Eigen::Index>(labels.size()) != rows) {
        throw std::invalid_argument("classifier: label count does not match rows");
    }
    for (int label : labels) {
        if (label < 0 || label >= num_classes) {
            throw std::invalid_argument("classifier: label out of range");
        }
    }
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& source, const std::vector<int>& rows,
                            std::size_t begin, std::size_t end) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(end - begin), source.cols());
    for (std::size_t i = begin; i < end; ++i) {
        out.row(static_cast<Eigen::Index>(i - begin)) = source.row(rows[i]);
    }
    return out;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& source, const std::vector<int>& columns) {
    Eigen::MatrixXd out(source.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] < 0 || columns[c] >= source.cols()) {
            throw std::invalid_argument("classifier: selected column out of range");
        }
        out.col(static_cast<Eigen::Index>(c)) = source.col(columns[c]);
    }
    return out;
}

}  // namespace

void ClassifierConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("classifier: learning_rate must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("classifier: momentum must be in [0,1)");
    if (batch_size < 1) throw std::invalid_argument("classifier: batch_size must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("classifier: max_epochs must be >= 1");
    if (patience < 1) throw std::invalid_argument("classifier: patience must be >= 1");
}

Eigen::MatrixXd classifier_probabilities(const EvalClassifier& model,
                                         const Eigen::MatrixXd& features) {
    if (features.cols() != model.hidden_weights.cols()) {
        throw std::invalid_argument("classifier: feature width mismatch");
    }
    Eigen::MatrixXd hidden =
        ((features * model.hidden_weights.transpose()).rowwise() + model.hidden_bias.transpose())
            .cwiseMax(0.0);
    Eigen::MatrixXd logits =
        (hidden * model.output_weights.transpose()).rowwise() + model.output_bias.transpose();
    return softmax_rows(std::move(logits));
}

double classifier_loss(const EvalClassifier& model, const Eigen::MatrixXd& features,
                       const std::vector<int>& labels) {
    check_labels(labels, features.rows(), model.num_classes());
    const Eigen::MatrixXd probs = classifier_probabilities(model, features);
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        total -= std::log(std::max(probs(i, labels[static_cast<std::size_t>(i)]), 1e-300));
    }
    return total / static_cast<double>(probs.rows());
}

EvalClassifier train_classifier(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                int num_classes, int hidden_width, const ClassifierConfig& config,
                                std::uint64_t seed, const Eigen::MatrixXd* validation_features,
                                const std::vector<int>* validation_labels) {
    config.validate();
    if (num_classes < 2) throw std::invalid_argument("classifier: need at least 2 classes");
    if (hidden_width < 1) throw std::invalid_argument("classifier: hidden_width must be >= 1");
    if (features.rows() == 0 || features.cols() == 0) {
        throw std::invalid_argument("classifier: empty feature matrix");
    }
    check_labels(labels, features.rows(), num_classes);
    if ((validation_features == nullptr) != (validation_labels == nullptr)) {
        throw std::invalid_argument("classifier: validation features and labels must come together");
    }
    if (validation_features != nullptr) {
        check_labels(*validation_labels, validation_features->rows(), num_classes);
    }

    Rng rng(mix_seed(seed, SeedStream::classifier));
    EvalClassifier model;
    model.hidden_weights = glorot(hidden_width, features.cols(), rng);
    model.hidden_bias = Eigen::VectorXd::Zero(hidden_width);
    model.output_weights = glorot(num_classes, hidden_width, rng);
    model.output_bias = Eigen::VectorXd::Zero(num_classes);

    Eigen::MatrixXd vel_hw = Eigen::MatrixXd::Zero(hidden_width, features.cols());
    Eigen::VectorXd vel_hb = Eigen::VectorXd::Zero(hidden_width);
    Eigen::MatrixXd vel_ow = Eigen::MatrixXd::Zero(num_classes, hidden_width);
    Eigen::VectorXd vel_ob = Eigen::VectorXd::Zero(num_classes);

    std::vector<int> index(labels.size());
    std::iota(index.begin(), index.end(), 0);

    EvalClassifier best = model;
    double best_accuracy = -1.0;
    int stagnant = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        rng.shuffle(index);
        for (std::size_t start = 0; start < index.size(); start += config.batch_size) {
            const std::size_t stop = std::min(index.size(), start + config.batch_size);
            const Eigen::MatrixXd batch = gather_rows(features, index, start, stop);
            const Eigen::Index b = batch.rows();

            Eigen::MatrixXd hidden =
                ((batch * model.hidden_weights.transpose()).rowwise() +
                 model.hidden_bias.transpose())
                    .cwiseMax(0.0);
            Eigen::MatrixXd probs = softmax_rows(
                (hidden * model.output_weights.transpose()).rowwise() +
                model.output_bias.transpose());

            double loss = 0.0;
            Eigen::MatrixXd delta = probs;  // becomes (probs - onehot) / b
            for (Eigen::Index i = 0; i < b; ++i) {
                const int label = labels[static_cast<std::size_t>(index[start + i])];
                loss -= std::log(std::max(probs(i, label), 1e-300));
                delta(i, label) -= 1.0;
            }
            loss /= static_cast<double>(b);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "classifier: non-finite loss at epoch " << epoch
                    << " (learning_rate=" << config.learning_rate
                    << ", momentum=" << config.momentum << ", batch_size=" << config.batch_size
                    << ", hidden_width=" << hidden_width << ")";
                throw std::runtime_error(msg.str());
            }
            delta /= static_cast<double>(b);

            const Eigen::MatrixXd grad_ow = delta.transpose() * hidden;
            const Eigen::VectorXd grad_ob = delta.colwise().sum();
            Eigen::MatrixXd delta_hidden = delta * model.output_weights;
            delta_hidden.array() *= (hidden.array() > 0.0).cast<double>();
            const Eigen::MatrixXd grad_hw = delta_hidden.transpose() * batch;
            const Eigen::VectorXd grad_hb = delta_hidden.colwise().sum();

            vel_ow = config.momentum * vel_ow - config.learning_rate * grad_ow;
            vel_ob = config.momentum * vel_ob - config.learning_rate * grad_ob;
            vel_hw = config.momentum * vel_hw - config.learning_rate * grad_hw;
            vel_hb = config.momentum * vel_hb - config.learning_rate * grad_hb;
            model.output_weights += vel_ow;
            model.output_bias += vel_ob;
            model.hidden_weights += vel_hw;
            model.hidden_bias += vel_hb;
        }

        if (validation_features != nullptr) {
            const double acc = accuracy(model, *validation_features, *validation_labels);
            if (acc > best_accuracy) {
                best_accuracy = acc;
                best = model;
                stagnant = 0;
            } else if (++stagnant >= config.patience) {
                break;
            }
        }
    }
    return validation_features != nullptr ? best : model;
}

double accuracy(const EvalClassifier& model, const Eigen::MatrixXd& features,
                const std::vector<int>& labels) {
    check_labels(labels, features.rows(), model.num_classes());
    if (features.rows() == 0) throw std::invalid_argument("classifier: empty evaluation set");
    const Eigen::MatrixXd probs = classifier_probabilities(model, features);
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        int arg = 0;
        for (Eigen::Index c = 1; c < probs.cols(); ++c) {
            if (probs(i, c) > probs(i, arg)) arg = static_cast<int>(c);
        }
        if (arg == labels[static_cast<std::size_t>(i)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

void EvaluationReport::validate() const {
    if (accuracies.size() != static_cast<std::size_t>(repeats)) {
        throw std::invalid_argument("report: repeat count mismatch");
    }
    const double m =
        std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(repeats);
    double var = 0.0;
    for (double a : accuracies) var += (a - m) * (a - m);
    var /= static_cast<double>(repeats);
    if (std::abs(m - mean) > 1e-12 || std::abs(std::sqrt(var) - std_dev) > 1e-12) {
        throw std::invalid_argument("report: stored statistics do not match the accuracy list");
    }
}

EvaluationReport repeated_eval(const Eigen::MatrixXd& train_features,
                               const std::vector<int>& train_labels,
                               const Eigen::MatrixXd& eval_features,
                               const std::vector<int>& eval_labels,
                               const std::vector<int>& selected, int num_classes,
                               int hidden_width, const ClassifierConfig& config,
                               std::uint64_t seed, int repeats,
                               const Eigen::MatrixXd* validation_features,
                               const std::vector<int>* validation_labels) {
    if (selected.empty()) throw std::invalid_argument("repeated_eval: selected feature set is empty");
    if (repeats < 1) throw std::invalid_argument("repeated_eval: repeats must be >= 1");
    if (train_features.cols() != eval_features.cols()) {
        throw std::invalid_argument("repeated_eval: train/eval width mismatch");
    }

    const Eigen::MatrixXd train_sel = gather_columns(train_features, selected);
    const Eigen::MatrixXd eval_sel = gather_columns(eval_features, selected);
    Eigen::MatrixXd validation_sel;
    if (validation_features != nullptr) {
        validation_sel = gather_columns(*validation_features, selected);
    }

    EvaluationReport report;
    report.repeats = repeats;
    report.selected_count = static_cast<int>(selected.size());
    report.hidden_width = hidden_width;
    report.seed = seed;
    report.config = config;
    report.accuracies.reserve(static_cast<std::size_t>(repeats));
    for (int r = 0; r < repeats; ++r) {
        const EvalClassifier model = train_classifier(
            train_sel, train_labels, num_classes, hidden_width, config,
            seed + static_cast<std::uint64_t>(r),
            validation_features != nullptr ? &validation_sel : nullptr, validation_labels);
        report.accuracies.push_back(accuracy(model, eval_sel, eval_labels));
    }
    report.mean = std::accumulate(report.accuracies.begin(), report.accuracies.end(), 0.0) /
                  static_cast<double>(repeats);
    double var = 0.0;
    for (double a : report.accuracies) var += (a - report.mean) * (a - report.mean);
    report.std_dev = std::sqrt(var / static_cast<double>(repeats));
    return report;
}

}  // namespace sce
