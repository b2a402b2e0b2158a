#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace sce {

/// Labeled sample matrix. Rows are samples, columns are features. Labels are
/// dense class indices 0..M-1 in first-appearance order of the source file.
struct Dataset {
    Eigen::MatrixXd features;  // N x D
    std::vector<int> labels;   // length N, values in 0..M-1
    std::vector<std::string> feature_names;
    std::vector<std::string> class_names;

    Eigen::Index n() const { return features.rows(); }
    Eigen::Index dim() const { return features.cols(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }

    /// Throws std::invalid_argument if any Dataset invariant is violated.
    void validate() const;

    /// Row indices of class j, in ascending order.
    std::vector<Eigen::Index> class_indices(int j) const;

    Dataset select_rows(const std::vector<Eigen::Index>& rows) const;
    Dataset select_columns(const std::vector<Eigen::Index>& cols) const;
};

enum class MissingPolicy { fail, mean_impute };

/// Column to treat as the label: matched by header name first, then, if the
/// spelling is an integer, as a zero-based column index.
struct LabelColumn {
    std::string spec;
    static LabelColumn name_or_index(const std::string& s) { return LabelColumn{s}; }
};

/// Parse an RFC-4180-style CSV (header row required) into a Dataset.
/// Missing markers are the empty string, "NA" and "NaN" (case-insensitive);
/// under mean_impute they are replaced by the column mean over present cells.
Dataset load_csv(const std::string& path, const LabelColumn& label_column,
                 MissingPolicy missing_policy, char delimiter = ',');

struct StandardizationParams {
    Eigen::VectorXd mean;   // length D
    Eigen::VectorXd scale;  // length D, strictly positive
};

/// Column means and population standard deviations; zero-variance columns
/// get scale 1 so feature indices stay aligned with the raw file.
StandardizationParams fit_standardizer(const Dataset& train);

Dataset apply_standardizer(const StandardizationParams& params, const Dataset& data);
Dataset invert_standardizer(const StandardizationParams& params, const Dataset& data);

struct SplitSpec {
    double train_fraction = 0.7;
    double validation_fraction = 0.1;
    double test_fraction = 0.2;
    bool stratified = true;
    std::uint64_t seed = 0;

    void validate() const;  // fractions nonnegative, sum 1 within 1e-12
};

struct SplitIndices {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> validation;
    std::vector<Eigen::Index> test;
};

struct SplitSets {
    Dataset train;
    Dataset validation;
    Dataset test;
};

/// Deterministic stratified (or plain) partition. Fractional part sizes are
/// resolved by flooring per (class, part) and handing leftovers to parts in
/// train, validation, test order, skipping parts with fraction 0.
SplitIndices split_indices(const Dataset& data, const SplitSpec& spec);
SplitSets split(const Dataset& data, const SplitSpec& spec);

struct FoldPlan {
    int fold_count = 0;
    std::vector<std::vector<Eigen::Index>> held_out;  // per fold, ascending
    std::uint64_t seed = 0;
};

/// Stratified k-fold partition of 0..N-1; every class needs >= k samples.
FoldPlan make_folds(const Dataset& data, int k, std::uint64_t seed);

}  // namespace sce
