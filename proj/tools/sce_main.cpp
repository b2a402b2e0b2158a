#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sce/config.hpp"
#include "sce/pipeline.hpp"
#include "sce/serialize.hpp"

namespace {

using namespace sce;
using nlohmann::json;

struct Flags {
    std::string config_path;
    std::string data;
    std::string label_col;
    std::uint64_t seed = 0;
    std::string out;
    int jobs = 0;
    int top_k = 0;
    double lambda = 0.0;
    int centers = 0;
    int hidden = 0;
    int layers = 0;
    int iters = 0;
    bool no_standardize = false;
};

struct FlagOptions {
    CLI::Option* data = nullptr;
    CLI::Option* label_col = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* jobs = nullptr;
    CLI::Option* top_k = nullptr;
    CLI::Option* lambda = nullptr;
    CLI::Option* centers = nullptr;
    CLI::Option* hidden = nullptr;
    CLI::Option* layers = nullptr;
    CLI::Option* iters = nullptr;
    CLI::Option* no_standardize = nullptr;
};

FlagOptions add_common_flags(CLI::App* cmd, Flags& flags) {
    FlagOptions opts;
    cmd->add_option("--config", flags.config_path, "JSON config file");
    opts.data = cmd->add_option("--data", flags.data, "dataset CSV (split mode)");
    opts.label_col = cmd->add_option("--label-col", flags.label_col, "label column name or index");
    opts.seed = cmd->add_option("--seed", flags.seed, "run seed");
    opts.out = cmd->add_option("--out", flags.out, "output directory");
    opts.jobs = cmd->add_option("--jobs", flags.jobs, "worker threads");
    opts.top_k = cmd->add_option("--top-k", flags.top_k, "use the top K ranked features");
    opts.lambda = cmd->add_option("--lambda", flags.lambda, "l1 penalty weight");
    opts.centers = cmd->add_option("--centers", flags.centers, "centroids per class");
    opts.hidden = cmd->add_option("--hidden", flags.hidden, "hidden layer width");
    opts.layers = cmd->add_option("--layers", flags.layers, "hidden layer count (1 or 2)");
    opts.iters = cmd->add_option("--iters", flags.iters, "SCG iterations");
    opts.no_standardize =
        cmd->add_flag("--no-standardize", flags.no_standardize, "train on raw features");
    return opts;
}

RunConfig build_config(const Flags& flags, const FlagOptions& opts) {
    RunConfig config;
    if (!flags.config_path.empty()) {
        config = config_from_json(read_text_file(flags.config_path));
    }
    if (opts.data->count() > 0) config.data_path = flags.data;
    if (opts.label_col->count() > 0) config.label_column = flags.label_col;
    if (opts.seed->count() > 0) config.seed = flags.seed;
    if (opts.out->count() > 0) config.out_dir = flags.out;
    if (opts.jobs->count() > 0) config.jobs = flags.jobs;
    if (opts.top_k->count() > 0) config.top_k = flags.top_k;
    if (opts.lambda->count() > 0) config.hyper.lambda = flags.lambda;
    if (opts.centers->count() > 0) config.hyper.centers_per_class = flags.centers;
    if (opts.hidden->count() > 0) config.hyper.hidden_width = flags.hidden;
    if (opts.layers->count() > 0) config.hyper.hidden_layers = flags.layers;
    if (opts.iters->count() > 0) config.hyper.scg_iterations = flags.iters;
    if (opts.no_standardize->count() > 0) config.standardize = false;
    config.hyper.seed = config.seed;
    config.validate();
    return config;
}

// Remap another part's labels onto the training label order so every part
// shares one class index space.
Dataset align_classes(const Dataset& train, Dataset part, const std::string& which) {
    if (part.class_names == train.class_names) return part;
    std::vector<int> remap(part.class_names.size(), -1);
    for (std::size_t c = 0; c < part.class_names.size(); ++c) {
        for (std::size_t t = 0; t < train.class_names.size(); ++t) {
            if (part.class_names[c] == train.class_names[t]) {
                remap[c] = static_cast<int>(t);
                break;
            }
        }
        if (remap[c] < 0) {
            throw std::runtime_error(which + " contains class '" + part.class_names[c] +
                                     "' absent from the training file");
        }
    }
    for (auto& label : part.labels) label = remap[static_cast<std::size_t>(label)];
    part.class_names = train.class_names;
    return part;
}

SplitSets load_sets(const RunConfig& config) {
    const LabelColumn label = LabelColumn::name_or_index(config.label_column);
    if (config.explicit_paths()) {
        SplitSets sets;
        sets.train = load_csv(*config.train_path, label, config.missing);
        if (config.validation_path) {
            sets.validation = align_classes(
                sets.train, load_csv(*config.validation_path, label, config.missing),
                "validation");
        }
        if (config.test_path) {
            sets.test = align_classes(
                sets.train, load_csv(*config.test_path, label, config.missing), "test");
        }
        return sets;
    }
    const Dataset all = load_csv(config.data_path, label, config.missing);
    SplitSpec spec = config.split;
    spec.seed = config.seed;
    return split(all, spec);
}

void require_part(const Dataset& part, const char* which) {
    if (part.n() == 0) {
        throw ConfigError(std::string("this command needs a nonempty ") + which +
                          " set; supply a '" + which + "' file or a nonzero split fraction");
    }
}

std::string out_path(const RunConfig& config, const std::string& name) {
    return (std::filesystem::path(config.out_dir) / name).string();
}

void write_config_echo(const RunConfig& config) {
    write_text_file(out_path(config, "config.json"), config_to_json(config));
}

json hyper_summary(const SceHyperparams& h) {
    return json{{"lambda", h.lambda},
                {"hidden_layers", h.hidden_layers},
                {"hidden_width", h.hidden_width},
                {"scg_iterations", h.scg_iterations},
                {"centers_per_class", h.centers_per_class},
                {"seed", h.seed}};
}

int cmd_select(const RunConfig& config) {
    const SplitSets sets = load_sets(config);
    require_part(sets.train, "train");

    const TrainOutput out = train_sce(sets.train, config.hyper, config.standardize);

    write_config_echo(config);
    write_text_file(out_path(config, "ranking.csv"),
                    ranking_csv(out.ranking, sets.train.feature_names));
    write_text_file(out_path(config, "model.json"),
                    model_to_json(out.model, config.hyper, out.standardizer, out.standardized));
    write_text_file(out_path(config, "run.json"), run_record_to_json(out.record));

    std::cout << "selected " << out.ranking.selected.size() << " of " << sets.train.dim()
              << " features\n";
    const std::size_t shown = std::min<std::size_t>(10, out.ranking.order.size());
    for (std::size_t i = 0; i < shown; ++i) {
        const int feature = out.ranking.order[i];
        std::cout << "  " << (i + 1) << ". "
                  << sets.train.feature_names[static_cast<std::size_t>(feature)]
                  << " (|w|=" << std::setprecision(6) << out.ranking.sorted_abs[i] << ")\n";
    }
    return 0;
}

int cmd_sweep(const RunConfig& config) {
    const SplitSets sets = load_sets(config);
    require_part(sets.train, "train");

    json doc{{"schema_version", 1}, {"kind", "sweep_result"}};
    SceHyperparams best;
    if (config.folds >= 2) {
        const FoldPlan plan = make_folds(sets.train, config.folds, config.seed);
        std::vector<double> means;
        best = cv_sweep(sets.train, plan, config.grid, config.seed, config.standardize,
                        config.jobs, &means);
        const auto points = config.grid.points(config.seed);
        json records = json::array();
        for (std::size_t i = 0; i < points.size(); ++i) {
            records.push_back(json{{"hyperparams", hyper_summary(points[i])},
                                   {"mean_validation_accuracy", means[i]}});
        }
        doc["folds"] = config.folds;
        doc["records"] = records;
    } else {
        require_part(sets.validation, "validation");
        const SweepResult result = sweep(sets.train, sets.validation, config.grid, config.seed,
                                         config.standardize, config.jobs);
        best = result.best;
        json records = json::array();
        for (const RunRecord& record : result.records) {
            records.push_back(json{{"hyperparams", hyper_summary(record.hyper)},
                                   {"validation_accuracy", *record.validation_accuracy},
                                   {"selected_count", record.selected_count}});
        }
        doc["records"] = records;
    }
    doc["best"] = hyper_summary(best);

    write_config_echo(config);
    write_text_file(out_path(config, "sweep.json"), doc.dump(2) + "\n");

    std::cout << "best: lambda=" << best.lambda << " layers=" << best.hidden_layers
              << " width=" << best.hidden_width << " iters=" << best.scg_iterations
              << " centers=" << best.centers_per_class << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& config) {
    const SplitSets sets = load_sets(config);
    require_part(sets.train, "train");
    require_part(sets.validation, "validation");
    require_part(sets.test, "test");

    EvaluateOptions options;
    options.top_k = config.top_k;
    options.repeats = config.repeats;
    options.hidden_width_grid = config.grid.hidden_widths;
    options.hidden_width_repeats = config.grid.metric_repeats;
    options.classifier = config.classifier;

    const EvaluateResult result = evaluate_protocol(sets, config.hyper, options, config.seed,
                                                    config.standardize, config.jobs);

    write_config_echo(config);
    write_text_file(out_path(config, "ranking.csv"),
                    ranking_csv(result.run.ranking, sets.train.feature_names));
    write_text_file(out_path(config, "run.json"), run_record_to_json(result.run));
    write_text_file(out_path(config, "report.json"), report_to_json(result.report));

    std::cout << "features used: " << result.features_used.size()
              << "  classifier width: " << result.chosen_hidden_width << "\n";
    std::cout << "repeat  accuracy\n";
    for (std::size_t r = 0; r < result.report.accuracies.size(); ++r) {
        std::cout << std::setw(6) << (r + 1) << "  " << std::fixed << std::setprecision(4)
                  << result.report.accuracies[r] << "\n";
    }
    std::cout << "mean " << std::fixed << std::setprecision(4) << result.report.mean << "  std "
              << result.report.std_dev << "\n";
    std::cout.unsetf(std::ios::fixed);
    return 0;
}

int cmd_analyze(const RunConfig& config) {
    const SplitSets sets = load_sets(config);
    require_part(sets.train, "train");
    require_part(sets.validation, "validation");

    std::vector<double> lambda_list = config.lambda_list;
    if (lambda_list.empty()) {
        // Published grid plus the 0.1 endpoint, in ascending order.
        lambda_list = {0.0001, 0.0002, 0.0004, 0.0006, 0.0008, 0.001, 0.01, 0.1};
    }

    std::vector<RunRecord> records;
    const std::vector<LambdaRow> rows =
        analyze_lambda(sets.train, sets.validation, lambda_list, config.hyper, config.grid,
                       config.standardize, config.jobs, &records);

    write_config_echo(config);
    write_text_file(out_path(config, "lambda_analysis.csv"), lambda_csv(rows));
    for (std::size_t i = 0; i < records.size(); ++i) {
        write_text_file(out_path(config, "run_" + std::to_string(i) + ".json"),
                        run_record_to_json(records[i]));
    }

    std::cout << "lambda  selected  val_acc\n";
    for (const LambdaRow& row : rows) {
        std::cout << std::setw(8) << row.lambda << "  " << std::setw(8) << row.selected_count
                  << "  " << std::setprecision(4) << row.validation_accuracy << "\n";
    }
    return 0;
}

int cmd_stability(const RunConfig& config) {
    const SplitSets sets = load_sets(config);
    require_part(sets.train, "train");

    const StabilityReport report = stability_report(sets.train, config.hyper,
                                                    config.stability_runs, config.seed,
                                                    config.standardize, config.jobs);

    write_config_echo(config);
    write_text_file(out_path(config, "stability.json"), stability_to_json(report));

    std::cout << "runs: " << report.selected_sets.size()
              << "  mean pairwise jaccard: " << std::setprecision(4)
              << report.mean_pairwise_jaccard << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse centroid-encoder feature selection"};
    app.require_subcommand(1);

    Flags flags;
    CLI::App* select = app.add_subcommand("select", "train and rank features");
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "hyperparameter grid search");
    CLI::App* evaluate = app.add_subcommand("evaluate", "top-K classification protocol");
    CLI::App* analyze = app.add_subcommand("analyze-lambda", "cost terms and accuracy per lambda");
    CLI::App* stability = app.add_subcommand("stability", "selected-set overlap across seeds");

    const FlagOptions select_opts = add_common_flags(select, flags);
    const FlagOptions sweep_opts = add_common_flags(sweep_cmd, flags);
    const FlagOptions evaluate_opts = add_common_flags(evaluate, flags);
    const FlagOptions analyze_opts = add_common_flags(analyze, flags);
    const FlagOptions stability_opts = add_common_flags(stability, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    std::string command;
    const FlagOptions* opts = nullptr;
    int (*run)(const RunConfig&) = nullptr;
    if (select->parsed()) {
        command = "select", opts = &select_opts, run = cmd_select;
    } else if (sweep_cmd->parsed()) {
        command = "sweep", opts = &sweep_opts, run = cmd_sweep;
    } else if (evaluate->parsed()) {
        command = "evaluate", opts = &evaluate_opts, run = cmd_evaluate;
    } else if (analyze->parsed()) {
        command = "analyze-lambda", opts = &analyze_opts, run = cmd_analyze;
    } else {
        command = "stability", opts = &stability_opts, run = cmd_stability;
    }

    std::optional<RunConfig> config;
    try {
        config = build_config(flags, *opts);
        return run(*config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        if (config) {
            try {
                write_text_file(out_path(*config, "error.json"),
                                error_record(command, e.what()));
            } catch (...) {
            }
        }
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (config) {
            try {
                write_text_file(out_path(*config, "error.json"),
                                error_record(command, e.what()));
            } catch (...) {
            }
        }
        return 1;
    }
}
