#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sce/centroids.hpp"
#include "sce/classifier.hpp"
#include "sce/cutoff.hpp"
#include "sce/dataset.hpp"
#include "sce/network.hpp"
#include "sce/scg.hpp"

namespace sce {

/// Candidate values per hyperparameter. Defaults are the published grid.
struct SweepGrid {
    std::vector<double> lambdas = grids::lambdas;
    std::vector<int> hidden_layers = grids::hidden_layers;
    std::vector<int> hidden_widths = grids::hidden_widths;
    std::vector<int> scg_iterations = grids::scg_iterations;
    std::vector<int> centers_per_class = grids::centers_per_class;

    // Selection metric: validation accuracy of repeated_eval over the
    // metric features (top-K when top_k is set, else the elbow-selected set).
    int metric_repeats = 3;             // 1..5
    std::optional<int> metric_top_k;
    int metric_hidden_width = 50;
    ClassifierConfig metric_classifier;

    void validate() const;
    static SweepGrid single_point(const SceHyperparams& hyper);

    /// Cartesian product in declaration order (lambda outermost), with
    /// hyper.seed = seed for every point.
    std::vector<SceHyperparams> points(std::uint64_t seed) const;
};

struct RunRecord {
    SceHyperparams hyper;
    int scg_accepted = 0;
    bool scg_aborted = false;
    double final_cost = 0.0;
    double centroid_term = 0.0;  // (1/2N) sum of squared target residuals
    double l1_term = 0.0;        // lambda * ||spl||_1
    double spl_l1 = 0.0;         // ||spl||_1, unweighted
    FeatureRanking ranking;
    int selected_count = 0;
    std::optional<double> validation_accuracy;
    double wall_seconds = 0.0;
};

struct TrainOutput {
    SceModel model;
    FeatureRanking ranking;
    RunRecord record;
    StandardizationParams standardizer;  // identity when standardization is off
    bool standardized = true;
};

/// Standardize (unless disabled), build centroid targets with
/// kmeans_per_class(centers_per_class), minimize the SCE loss with SCG on the
/// full batch, then rank and elbow-cut the trained sparsity weights.
TrainOutput train_sce(const Dataset& train, const SceHyperparams& hyper, bool standardize = true);

struct SweepResult {
    SceHyperparams best;
    std::vector<RunRecord> records;  // grid order
};

/// Full Cartesian sweep; every point is scored by validation accuracy of
/// repeated_eval on the metric features. Ties prefer fewer selected
/// features, then the smaller lambda grid index, then grid order. A point
/// whose selection comes up empty scores accuracy 0.
SweepResult sweep(const Dataset& train, const Dataset& validation, const SweepGrid& grid,
                  std::uint64_t seed, bool standardize = true, int jobs = 1);

/// Per grid point, mean validation accuracy across folds (train on the other
/// folds, validate on the held-out one); same tie-break as sweep. When
/// mean_accuracies is non-null it receives one entry per grid point.
SceHyperparams cv_sweep(const Dataset& train, const FoldPlan& folds, const SweepGrid& grid,
                        std::uint64_t seed, bool standardize = true, int jobs = 1,
                        std::vector<double>* mean_accuracies = nullptr);

struct LambdaRow {
    double lambda = 0.0;
    double centroid_cost = 0.0;
    double l1_cost = 0.0;  // ||spl||_1 of the stored model, unweighted
    double validation_accuracy = 0.0;
    int selected_count = 0;
};

/// One train_sce per lambda with a shared seed; validation accuracy uses the
/// elbow-selected features (0 when the selection is empty). When records is
/// non-null it receives the per-lambda run records.
std::vector<LambdaRow> analyze_lambda(const Dataset& train, const Dataset& validation,
                                      const std::vector<double>& lambda_list,
                                      const SceHyperparams& base, const SweepGrid& metric,
                                      bool standardize = true, int jobs = 1,
                                      std::vector<RunRecord>* records = nullptr);

/// Plot-ready CSV for the lambda analysis table.
std::string lambda_csv(const std::vector<LambdaRow>& rows);

struct StabilityReport {
    std::vector<std::vector<int>> selected_sets;  // per run, ascending indices
    std::vector<std::vector<double>> jaccard;     // runs x runs
    std::vector<std::vector<int>> intersection_sizes;
    double mean_pairwise_jaccard = 0.0;

    void validate() const;
};

/// Selected-set overlap across `runs` trainings with seeds seed+0..runs-1.
/// Two empty sets count as Jaccard 1.
StabilityReport stability_report(const Dataset& train, const SceHyperparams& hyper, int runs,
                                 std::uint64_t seed, bool standardize = true, int jobs = 1);

struct EvaluateOptions {
    std::optional<int> top_k;  // fixed K; absent uses the elbow-selected set
    int repeats = 20;
    std::vector<int> hidden_width_grid = grids::hidden_widths;  // H_c candidates
    int hidden_width_repeats = 3;  // repeats per candidate during H_c selection
    ClassifierConfig classifier;
};

struct EvaluateResult {
    RunRecord run;
    std::vector<int> features_used;  // ranked order
    int chosen_hidden_width = 0;
    EvaluationReport report;  // test accuracies over `repeats` classifiers
};

/// The benchmark protocol: train SCE on the training part, take the top-K
/// (or elbow-selected) features, pick the classifier width on the validation
/// part, then report repeated test accuracy.
EvaluateResult evaluate_protocol(const SplitSets& sets, const SceHyperparams& hyper,
                                 const EvaluateOptions& options, std::uint64_t seed,
                                 bool standardize = true, int jobs = 1);

}  // namespace sce
