#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace sce {

struct ClassifierConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;
    int max_epochs = 500;
    int patience = 25;  // stagnant validation checks before early stop

    void validate() const;
};

/// Evaluation-only network: one hidden ReLU layer, softmax output.
struct EvalClassifier {
    Eigen::MatrixXd hidden_weights;  // H_c x K
    Eigen::VectorXd hidden_bias;
    Eigen::MatrixXd output_weights;  // M x H_c
    Eigen::VectorXd output_bias;

    int input_dim() const { return static_cast<int>(hidden_weights.cols()); }
    int hidden_width() const { return static_cast<int>(hidden_weights.rows()); }
    int num_classes() const { return static_cast<int>(output_weights.rows()); }
};

/// Row-wise class probabilities (softmax; each row sums to 1).
Eigen::MatrixXd classifier_probabilities(const EvalClassifier& model,
                                         const Eigen::MatrixXd& features);

/// Mean softmax cross-entropy of the model on the given batch.
double classifier_loss(const EvalClassifier& model, const Eigen::MatrixXd& features,
                       const std::vector<int>& labels);

/// Mini-batch SGD with momentum on softmax cross-entropy. When a validation
/// set is supplied, keeps the best-validation-accuracy snapshot and stops
/// after `patience` checks without improvement. Deterministic given seed.
EvalClassifier train_classifier(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                                int num_classes, int hidden_width, const ClassifierConfig& config,
                                std::uint64_t seed,
                                const Eigen::MatrixXd* validation_features = nullptr,
                                const std::vector<int>* validation_labels = nullptr);

/// Fraction of samples whose argmax probability matches the label.
/// Ties go to the lowest class index.
double accuracy(const EvalClassifier& model, const Eigen::MatrixXd& features,
                const std::vector<int>& labels);

struct EvaluationReport {
    std::vector<double> accuracies;  // one per repeat, in repeat order
    double mean = 0.0;
    double std_dev = 0.0;  // population standard deviation
    int repeats = 0;
    int selected_count = 0;
    int hidden_width = 0;
    std::uint64_t seed = 0;
    ClassifierConfig config;

    void validate() const;
};

/// Restrict train/eval features to the selected columns, train `repeats`
/// classifiers with seeds seed+0 .. seed+repeats-1, and report the accuracy
/// of each on the eval set.
EvaluationReport repeated_eval(const Eigen::MatrixXd& train_features,
                               const std::vector<int>& train_labels,
                               const Eigen::MatrixXd& eval_features,
                               const std::vector<int>& eval_labels,
                               const std::vector<int>& selected, int num_classes,
                               int hidden_width, const ClassifierConfig& config,
                               std::uint64_t seed, int repeats = 20,
                               const Eigen::MatrixXd* validation_features = nullptr,
                               const std::vector<int>* validation_labels = nullptr);

}  // namespace sce
