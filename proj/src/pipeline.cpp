#include "sce/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "sce/rng.hpp"

namespace sce {

namespace {

// Runs fn(0..count-1) on up to `jobs` threads. Each index writes only its
// own slot, so results do not depend on scheduling.
void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    if (jobs == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

StandardizationParams identity_standardizer(Eigen::Index dim) {
    StandardizationParams params;
    params.mean = Eigen::VectorXd::Zero(dim);
    params.scale = Eigen::VectorXd::Ones(dim);
    return params;
}

void check_compatible(const Dataset& a, const Dataset& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument(std::string(what) + ": feature width mismatch");
    }
    if (a.class_names != b.class_names) {
        throw std::invalid_argument(std::string(what) + ": class set mismatch");
    }
}

/// Metric features for one trained run: top-K of the ranking when requested,
/// otherwise the elbow selection.
std::vector<int> metric_features(const FeatureRanking& ranking, const std::optional<int>& k) {
    if (k) return top_k(ranking.order, *k);
    return ranking.selected;
}

double metric_accuracy(const Dataset& train, const Dataset& validation,
                       const FeatureRanking& ranking, const SweepGrid& grid,
                       std::uint64_t seed) {
    const std::vector<int> features = metric_features(ranking, grid.metric_top_k);
    if (features.empty()) return 0.0;
    const EvaluationReport report = repeated_eval(
        train.features, train.labels, validation.features, validation.labels, features,
        train.num_classes(), grid.metric_hidden_width, grid.metric_classifier,
        mix_seed(seed, SeedStream::repeat), grid.metric_repeats);
    return report.mean;
}

struct ScoredPoint {
    double accuracy = -1.0;
    double selected = 0.0;
    std::size_t lambda_index = 0;
    std::size_t position = 0;
};

// Highest accuracy wins; ties prefer fewer selected features, then the
// smaller lambda grid index, then grid order.
bool better(const ScoredPoint& a, const ScoredPoint& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.selected != b.selected) return a.selected < b.selected;
    if (a.lambda_index != b.lambda_index) return a.lambda_index < b.lambda_index;
    return a.position < b.position;
}

std::vector<Eigen::Index> complement_of(const std::vector<Eigen::Index>& held_out,
                                        Eigen::Index n) {
    std::vector<Eigen::Index> rest;
    rest.reserve(static_cast<std::size_t>(n) - held_out.size());
    std::size_t cursor = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (cursor < held_out.size() && held_out[cursor] == i) {
            ++cursor;
        } else {
            rest.push_back(i);
        }
    }
    return rest;
}

}  // namespace

void SweepGrid::validate() const {
    if (lambdas.empty() || hidden_layers.empty() || hidden_widths.empty() ||
        scg_iterations.empty() || centers_per_class.empty()) {
        throw std::invalid_argument("sweep grid: every value list must be nonempty");
    }
    if (metric_repeats < 1 || metric_repeats > 5) {
        throw std::invalid_argument("sweep grid: metric_repeats must be in 1..5");
    }
    if (metric_top_k && *metric_top_k < 1) {
        throw std::invalid_argument("sweep grid: metric_top_k must be >= 1");
    }
    if (metric_hidden_width < 1) {
        throw std::invalid_argument("sweep grid: metric_hidden_width must be >= 1");
    }
    metric_classifier.validate();
}

SweepGrid SweepGrid::single_point(const SceHyperparams& hyper) {
    hyper.validate();
    SweepGrid grid;
    grid.lambdas = {hyper.lambda};
    grid.hidden_layers = {hyper.hidden_layers};
    grid.hidden_widths = {hyper.hidden_width};
    grid.scg_iterations = {hyper.scg_iterations};
    grid.centers_per_class = {hyper.centers_per_class};
    return grid;
}

std::vector<SceHyperparams> SweepGrid::points(std::uint64_t seed) const {
    validate();
    std::vector<SceHyperparams> out;
    for (double lambda : lambdas) {
        for (int layers : hidden_layers) {
            for (int width : hidden_widths) {
                for (int iters : scg_iterations) {
                    for (int centers : centers_per_class) {
                        SceHyperparams hyper;
                        hyper.lambda = lambda;
                        hyper.hidden_layers = layers;
                        hyper.hidden_width = width;
                        hyper.scg_iterations = iters;
                        hyper.centers_per_class = centers;
                        hyper.seed = seed;
                        hyper.validate();
                        out.push_back(hyper);
                    }
                }
            }
        }
    }
    return out;
}

TrainOutput train_sce(const Dataset& train, const SceHyperparams& hyper, bool standardize) {
    train.validate();
    hyper.validate();

    TrainOutput out;
    out.standardized = standardize;
    out.standardizer =
        standardize ? fit_standardizer(train) : identity_standardizer(train.dim());
    const Dataset data = standardize ? apply_standardizer(out.standardizer, train) : train;

    const CentroidMap centroids =
        kmeans_per_class(data, hyper.centers_per_class, hyper.seed);
    const Eigen::MatrixXd targets = targets_for(centroids, data);

    const SceModel initial = init_model(data.dim(), hyper);
    const ParamShape shape = shape_of(initial);
    const ScgObjective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        return loss_grad_sce(unpack(theta, shape), data.features, targets, hyper.lambda, grad);
    };

    ScgConfig scg;
    scg.max_iterations = hyper.scg_iterations;

    const auto start = std::chrono::steady_clock::now();
    const ScgResult fit = minimize(objective, pack(initial), scg);
    const auto stop = std::chrono::steady_clock::now();

    out.model = unpack(fit.theta, shape);
    out.ranking = select_features(out.model.spl);

    RunRecord& record = out.record;
    record.hyper = hyper;
    record.scg_accepted = fit.trace.accepted_count;
    record.scg_aborted = fit.trace.aborted;
    record.final_cost = fit.cost;
    record.centroid_term = loss_sce(out.model, data.features, targets, 0.0);
    record.spl_l1 = out.model.spl.lpNorm<1>();
    record.l1_term = hyper.lambda * record.spl_l1;
    record.ranking = out.ranking;
    record.selected_count = static_cast<int>(out.ranking.selected.size());
    record.wall_seconds = std::chrono::duration<double>(stop - start).count();
    return out;
}

SweepResult sweep(const Dataset& train, const Dataset& validation, const SweepGrid& grid,
                  std::uint64_t seed, bool standardize, int jobs) {
    grid.validate();
    train.validate();
    validation.validate();
    check_compatible(train, validation, "sweep");

    const StandardizationParams params =
        standardize ? fit_standardizer(train) : identity_standardizer(train.dim());
    const Dataset train_std = standardize ? apply_standardizer(params, train) : train;
    const Dataset validation_std =
        standardize ? apply_standardizer(params, validation) : validation;

    const std::vector<SceHyperparams> points = grid.points(seed);
    const std::size_t per_lambda = points.size() / grid.lambdas.size();

    SweepResult result;
    result.records.resize(points.size());
    std::vector<ScoredPoint> scores(points.size());
    parallel_for(jobs, points.size(), [&](std::size_t i) {
        TrainOutput out = train_sce(train_std, points[i], false);
        const double acc = metric_accuracy(train_std, validation_std, out.ranking, grid, seed);
        out.record.validation_accuracy = acc;
        scores[i] = {acc, static_cast<double>(out.record.selected_count), i / per_lambda, i};
        result.records[i] = std::move(out.record);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (better(scores[i], scores[best])) best = i;
    }
    result.best = points[best];
    return result;
}

SceHyperparams cv_sweep(const Dataset& train, const FoldPlan& folds, const SweepGrid& grid,
                        std::uint64_t seed, bool standardize, int jobs,
                        std::vector<double>* mean_accuracies) {
    grid.validate();
    train.validate();
    if (folds.fold_count < 2) throw std::invalid_argument("cv_sweep: need at least 2 folds");
    if (folds.held_out.size() != static_cast<std::size_t>(folds.fold_count)) {
        throw std::invalid_argument("cv_sweep: malformed fold plan");
    }

    // Per-fold datasets, standardized on the training side of the fold.
    std::vector<Dataset> fold_train(folds.held_out.size());
    std::vector<Dataset> fold_validation(folds.held_out.size());
    for (std::size_t f = 0; f < folds.held_out.size(); ++f) {
        const Dataset train_part = train.select_rows(complement_of(folds.held_out[f], train.n()));
        const Dataset validation_part = train.select_rows(folds.held_out[f]);
        const StandardizationParams params =
            standardize ? fit_standardizer(train_part) : identity_standardizer(train.dim());
        fold_train[f] = standardize ? apply_standardizer(params, train_part) : train_part;
        fold_validation[f] =
            standardize ? apply_standardizer(params, validation_part) : validation_part;
    }

    const std::vector<SceHyperparams> points = grid.points(seed);
    const std::size_t per_lambda = points.size() / grid.lambdas.size();
    const std::size_t fold_count = folds.held_out.size();

    std::vector<double> task_accuracy(points.size() * fold_count, 0.0);
    std::vector<double> task_selected(points.size() * fold_count, 0.0);
    parallel_for(jobs, points.size() * fold_count, [&](std::size_t task) {
        const std::size_t i = task / fold_count;
        const std::size_t f = task % fold_count;
        const TrainOutput out = train_sce(fold_train[f], points[i], false);
        task_accuracy[task] =
            metric_accuracy(fold_train[f], fold_validation[f], out.ranking, grid, seed);
        task_selected[task] = out.record.selected_count;
    });

    std::vector<ScoredPoint> scores(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        double accuracy_sum = 0.0;
        double selected_sum = 0.0;
        for (std::size_t f = 0; f < fold_count; ++f) {
            accuracy_sum += task_accuracy[i * fold_count + f];
            selected_sum += task_selected[i * fold_count + f];
        }
        scores[i] = {accuracy_sum / static_cast<double>(fold_count),
                     selected_sum / static_cast<double>(fold_count), i / per_lambda, i};
    }
    if (mean_accuracies) {
        mean_accuracies->clear();
        for (const auto& s : scores) mean_accuracies->push_back(s.accuracy);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (better(scores[i], scores[best])) best = i;
    }
    return points[best];
}

std::vector<LambdaRow> analyze_lambda(const Dataset& train, const Dataset& validation,
                                      const std::vector<double>& lambda_list,
                                      const SceHyperparams& base, const SweepGrid& metric,
                                      bool standardize, int jobs,
                                      std::vector<RunRecord>* records) {
    if (lambda_list.empty()) throw std::invalid_argument("analyze_lambda: empty lambda list");
    metric.validate();
    train.validate();
    validation.validate();
    check_compatible(train, validation, "analyze_lambda");

    const StandardizationParams params =
        standardize ? fit_standardizer(train) : identity_standardizer(train.dim());
    const Dataset train_std = standardize ? apply_standardizer(params, train) : train;
    const Dataset validation_std =
        standardize ? apply_standardizer(params, validation) : validation;

    std::vector<LambdaRow> rows(lambda_list.size());
    if (records) records->resize(lambda_list.size());
    parallel_for(jobs, lambda_list.size(), [&](std::size_t i) {
        SceHyperparams hyper = base;
        hyper.lambda = lambda_list[i];
        TrainOutput out = train_sce(train_std, hyper, false);
        LambdaRow& row = rows[i];
        row.lambda = lambda_list[i];
        row.centroid_cost = out.record.centroid_term;
        row.l1_cost = out.record.spl_l1;
        row.selected_count = out.record.selected_count;
        row.validation_accuracy =
            metric_accuracy(train_std, validation_std, out.ranking, metric, base.seed);
        out.record.validation_accuracy = row.validation_accuracy;
        if (records) (*records)[i] = std::move(out.record);
    });
    return rows;
}

std::string lambda_csv(const std::vector<LambdaRow>& rows) {
    std::ostringstream out;
    out << "lambda,centroid_cost,l1_cost,validation_accuracy,selected_count\n";
    out << std::setprecision(17);
    for (const auto& row : rows) {
        out << row.lambda << ',' << row.centroid_cost << ',' << row.l1_cost << ','
            << row.validation_accuracy << ',' << row.selected_count << '\n';
    }
    return out.str();
}

void StabilityReport::validate() const {
    const std::size_t runs = selected_sets.size();
    if (jaccard.size() != runs || intersection_sizes.size() != runs) {
        throw std::invalid_argument("stability: matrix size mismatch");
    }
    for (std::size_t i = 0; i < runs; ++i) {
        if (jaccard[i].size() != runs || intersection_sizes[i].size() != runs) {
            throw std::invalid_argument("stability: matrix size mismatch");
        }
        if (jaccard[i][i] != 1.0) throw std::invalid_argument("stability: diagonal must be 1");
        if (!std::is_sorted(selected_sets[i].begin(), selected_sets[i].end())) {
            throw std::invalid_argument("stability: selected sets must be sorted");
        }
    }
}

StabilityReport stability_report(const Dataset& train, const SceHyperparams& hyper, int runs,
                                 std::uint64_t seed, bool standardize, int jobs) {
    if (runs < 2) throw std::invalid_argument("stability_report: runs must be >= 2");
    train.validate();

    const StandardizationParams params =
        standardize ? fit_standardizer(train) : identity_standardizer(train.dim());
    const Dataset train_std = standardize ? apply_standardizer(params, train) : train;

    StabilityReport report;
    report.selected_sets.resize(static_cast<std::size_t>(runs));
    parallel_for(jobs, static_cast<std::size_t>(runs), [&](std::size_t r) {
        SceHyperparams h = hyper;
        h.seed = seed + r;
        const TrainOutput out = train_sce(train_std, h, false);
        std::vector<int> selected = out.ranking.selected;
        std::sort(selected.begin(), selected.end());
        report.selected_sets[r] = std::move(selected);
    });

    const std::size_t n = report.selected_sets.size();
    report.jaccard.assign(n, std::vector<double>(n, 0.0));
    report.intersection_sizes.assign(n, std::vector<int>(n, 0));
    double pair_sum = 0.0;
    std::size_t pair_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<int> shared;
            std::set_intersection(report.selected_sets[i].begin(), report.selected_sets[i].end(),
                                  report.selected_sets[j].begin(), report.selected_sets[j].end(),
                                  std::back_inserter(shared));
            const std::size_t union_size = report.selected_sets[i].size() +
                                           report.selected_sets[j].size() - shared.size();
            const double jac =
                union_size == 0 ? 1.0
                                : static_cast<double>(shared.size()) /
                                      static_cast<double>(union_size);
            report.intersection_sizes[i][j] = static_cast<int>(shared.size());
            report.jaccard[i][j] = jac;
            if (i < j) {
                pair_sum += jac;
                ++pair_count;
            }
        }
    }
    report.mean_pairwise_jaccard = pair_sum / static_cast<double>(pair_count);
    return report;
}

EvaluateResult evaluate_protocol(const SplitSets& sets, const SceHyperparams& hyper,
                                 const EvaluateOptions& options, std::uint64_t seed,
                                 bool standardize, int jobs) {
    sets.train.validate();
    sets.validation.validate();
    sets.test.validate();
    check_compatible(sets.train, sets.validation, "evaluate");
    check_compatible(sets.train, sets.test, "evaluate");
    options.classifier.validate();
    if (options.repeats < 1) throw std::invalid_argument("evaluate: repeats must be >= 1");
    if (options.hidden_width_grid.empty()) {
        throw std::invalid_argument("evaluate: hidden width grid is empty");
    }

    const StandardizationParams params =
        standardize ? fit_standardizer(sets.train) : identity_standardizer(sets.train.dim());
    const Dataset train = standardize ? apply_standardizer(params, sets.train) : sets.train;
    const Dataset validation =
        standardize ? apply_standardizer(params, sets.validation) : sets.validation;
    const Dataset test = standardize ? apply_standardizer(params, sets.test) : sets.test;

    EvaluateResult result;
    TrainOutput out = train_sce(train, hyper, false);
    result.run = std::move(out.record);

    result.features_used = metric_features(out.ranking, options.top_k);
    if (result.features_used.empty()) {
        throw std::runtime_error(
            "evaluate: the elbow cut selected no features; rerun with an explicit top-K");
    }

    // Pick the classifier width on validation accuracy; ties take the
    // earlier grid entry.
    std::vector<double> width_accuracy(options.hidden_width_grid.size(), 0.0);
    parallel_for(jobs, options.hidden_width_grid.size(), [&](std::size_t i) {
        const EvaluationReport probe = repeated_eval(
            train.features, train.labels, validation.features, validation.labels,
            result.features_used, train.num_classes(), options.hidden_width_grid[i],
            options.classifier, mix_seed(seed, SeedStream::repeat, i),
            options.hidden_width_repeats);
        width_accuracy[i] = probe.mean;
    });
    std::size_t best_width = 0;
    for (std::size_t i = 1; i < width_accuracy.size(); ++i) {
        if (width_accuracy[i] > width_accuracy[best_width]) best_width = i;
    }
    result.chosen_hidden_width = options.hidden_width_grid[best_width];

    result.report = repeated_eval(
        train.features, train.labels, test.features, test.labels, result.features_used,
        train.num_classes(), result.chosen_hidden_width, options.classifier,
        mix_seed(seed, SeedStream::repeat), options.repeats, &validation.features,
        &validation.labels);
    return result;
}

}  // namespace sce
