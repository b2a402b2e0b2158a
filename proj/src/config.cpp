#include "sce/config.hpp"

#include <filesystem>
#include <set>

#include "json.hpp"

namespace sce {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

void reject_unknown_keys(const json& j, const char* scope,
                         const std::set<std::string>& known) {
    for (const auto& item : j.items()) {
        if (known.count(item.key()) == 0) {
            throw ConfigError(std::string("unknown config field '") + scope + item.key() + "'");
        }
    }
}

template <typename T>
void read_field(const json& j, const char* scope, const char* name, T& out) {
    if (!j.contains(name)) return;
    try {
        out = j.at(name).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + scope + name + "' has the wrong type");
    }
}

void read_optional_int(const json& j, const char* scope, const char* name,
                       std::optional<int>& out) {
    if (!j.contains(name)) return;
    if (j.at(name).is_null()) {
        out.reset();
        return;
    }
    int value = 0;
    read_field(j, scope, name, value);
    out = value;
}

void read_optional_string(const json& j, const char* scope, const char* name,
                          std::optional<std::string>& out) {
    if (!j.contains(name)) return;
    if (j.at(name).is_null()) {
        out.reset();
        return;
    }
    std::string value;
    read_field(j, scope, name, value);
    out = value;
}

void require_file(const std::string& field, const std::string& path) {
    if (path.empty()) throw ConfigError("config field '" + field + "' is empty");
    if (!std::filesystem::exists(path)) {
        throw ConfigError("config field '" + field + "': file not found: " + path);
    }
}

json hyper_json(const SceHyperparams& h) {
    return json{{"lambda", h.lambda},
                {"hidden_layers", h.hidden_layers},
                {"hidden_width", h.hidden_width},
                {"scg_iterations", h.scg_iterations},
                {"centers_per_class", h.centers_per_class}};
}

json classifier_json(const ClassifierConfig& c) {
    return json{{"learning_rate", c.learning_rate},
                {"momentum", c.momentum},
                {"batch_size", c.batch_size},
                {"max_epochs", c.max_epochs},
                {"patience", c.patience}};
}

void parse_classifier(const json& j, const char* scope, ClassifierConfig& out) {
    reject_unknown_keys(j, scope,
                        {"learning_rate", "momentum", "batch_size", "max_epochs", "patience"});
    read_field(j, scope, "learning_rate", out.learning_rate);
    read_field(j, scope, "momentum", out.momentum);
    read_field(j, scope, "batch_size", out.batch_size);
    read_field(j, scope, "max_epochs", out.max_epochs);
    read_field(j, scope, "patience", out.patience);
}

}  // namespace

void RunConfig::validate() const {
    const bool split_mode = !data_path.empty();
    if (split_mode == explicit_paths()) {
        throw ConfigError(
            "config must set exactly one of 'data' (with a split) or explicit 'train'/'validation'/'test' paths");
    }
    if (split_mode) {
        require_file("data", data_path);
        try {
            split.validate();
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config field 'split': ") + e.what());
        }
    } else {
        require_file("train", *train_path);
        if (validation_path) require_file("validation", *validation_path);
        if (test_path) require_file("test", *test_path);
    }
    if (label_column.empty()) throw ConfigError("config field 'label_column' is empty");

    try {
        hyper.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field 'hyperparams': ") + e.what());
    }
    try {
        grid.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field 'grid': ") + e.what());
    }
    try {
        classifier.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field 'classifier': ") + e.what());
    }

    if (top_k && *top_k < 1) throw ConfigError("config field 'top_k' must be >= 1");
    if (repeats < 1) throw ConfigError("config field 'repeats' must be >= 1");
    for (double v : lambda_list) {
        if (v < 0) throw ConfigError("config field 'lambda_list' entries must be >= 0");
    }
    if (stability_runs < 2) throw ConfigError("config field 'stability_runs' must be >= 2");
    if (folds != 0 && folds < 2) throw ConfigError("config field 'folds' must be 0 or >= 2");
    if (out_dir.empty()) throw ConfigError("config field 'out' is empty");
    if (jobs < 1) throw ConfigError("config field 'jobs' must be >= 1");
}

RunConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(j, "",
                        {"schema_version", "data", "train", "validation", "test", "label_column",
                         "missing", "split", "hyperparams", "grid", "classifier", "top_k",
                         "repeats", "lambda_list", "stability_runs", "folds", "out", "seed",
                         "standardize", "jobs"});
    if (!j.contains("schema_version")) {
        throw ConfigError("config field 'schema_version' is required");
    }
    int version = 0;
    read_field(j, "", "schema_version", version);
    if (version != kSchemaVersion) {
        throw ConfigError("config field 'schema_version' must be " +
                          std::to_string(kSchemaVersion));
    }

    RunConfig config;
    read_field(j, "", "data", config.data_path);
    read_optional_string(j, "", "train", config.train_path);
    read_optional_string(j, "", "validation", config.validation_path);
    read_optional_string(j, "", "test", config.test_path);
    read_field(j, "", "label_column", config.label_column);

    if (j.contains("missing")) {
        std::string policy;
        read_field(j, "", "missing", policy);
        if (policy == "fail") {
            config.missing = MissingPolicy::fail;
        } else if (policy == "mean_impute") {
            config.missing = MissingPolicy::mean_impute;
        } else {
            throw ConfigError("config field 'missing' must be 'fail' or 'mean_impute'");
        }
    }

    if (j.contains("split")) {
        const json& s = j.at("split");
        reject_unknown_keys(s, "split.", {"train", "validation", "test", "stratified"});
        read_field(s, "split.", "train", config.split.train_fraction);
        read_field(s, "split.", "validation", config.split.validation_fraction);
        read_field(s, "split.", "test", config.split.test_fraction);
        read_field(s, "split.", "stratified", config.split.stratified);
    }

    if (j.contains("hyperparams")) {
        const json& h = j.at("hyperparams");
        reject_unknown_keys(h, "hyperparams.",
                            {"lambda", "hidden_layers", "hidden_width", "scg_iterations",
                             "centers_per_class"});
        read_field(h, "hyperparams.", "lambda", config.hyper.lambda);
        read_field(h, "hyperparams.", "hidden_layers", config.hyper.hidden_layers);
        read_field(h, "hyperparams.", "hidden_width", config.hyper.hidden_width);
        read_field(h, "hyperparams.", "scg_iterations", config.hyper.scg_iterations);
        read_field(h, "hyperparams.", "centers_per_class", config.hyper.centers_per_class);
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        reject_unknown_keys(g, "grid.",
                            {"lambdas", "hidden_layers", "hidden_widths", "scg_iterations",
                             "centers_per_class", "metric_repeats", "metric_top_k",
                             "metric_hidden_width", "metric_classifier"});
        read_field(g, "grid.", "lambdas", config.grid.lambdas);
        read_field(g, "grid.", "hidden_layers", config.grid.hidden_layers);
        read_field(g, "grid.", "hidden_widths", config.grid.hidden_widths);
        read_field(g, "grid.", "scg_iterations", config.grid.scg_iterations);
        read_field(g, "grid.", "centers_per_class", config.grid.centers_per_class);
        read_field(g, "grid.", "metric_repeats", config.grid.metric_repeats);
        read_optional_int(g, "grid.", "metric_top_k", config.grid.metric_top_k);
        read_field(g, "grid.", "metric_hidden_width", config.grid.metric_hidden_width);
        if (g.contains("metric_classifier")) {
            parse_classifier(g.at("metric_classifier"), "grid.metric_classifier.",
                             config.grid.metric_classifier);
        }
    }

    if (j.contains("classifier")) {
        parse_classifier(j.at("classifier"), "classifier.", config.classifier);
    }

    read_optional_int(j, "", "top_k", config.top_k);
    read_field(j, "", "repeats", config.repeats);
    read_field(j, "", "lambda_list", config.lambda_list);
    read_field(j, "", "stability_runs", config.stability_runs);
    read_field(j, "", "folds", config.folds);
    read_field(j, "", "out", config.out_dir);
    read_field(j, "", "seed", config.seed);
    read_field(j, "", "standardize", config.standardize);
    read_field(j, "", "jobs", config.jobs);
    return config;
}

std::string config_to_json(const RunConfig& config) {
    json grid{{"lambdas", config.grid.lambdas},
              {"hidden_layers", config.grid.hidden_layers},
              {"hidden_widths", config.grid.hidden_widths},
              {"scg_iterations", config.grid.scg_iterations},
              {"centers_per_class", config.grid.centers_per_class},
              {"metric_repeats", config.grid.metric_repeats},
              {"metric_top_k", config.grid.metric_top_k ? json(*config.grid.metric_top_k)
                                                        : json(nullptr)},
              {"metric_hidden_width", config.grid.metric_hidden_width},
              {"metric_classifier", classifier_json(config.grid.metric_classifier)}};

    json j{{"schema_version", kSchemaVersion},
           {"data", config.data_path},
           {"train", config.train_path ? json(*config.train_path) : json(nullptr)},
           {"validation",
            config.validation_path ? json(*config.validation_path) : json(nullptr)},
           {"test", config.test_path ? json(*config.test_path) : json(nullptr)},
           {"label_column", config.label_column},
           {"missing", config.missing == MissingPolicy::fail ? "fail" : "mean_impute"},
           {"split", json{{"train", config.split.train_fraction},
                          {"validation", config.split.validation_fraction},
                          {"test", config.split.test_fraction},
                          {"stratified", config.split.stratified}}},
           {"hyperparams", hyper_json(config.hyper)},
           {"grid", grid},
           {"classifier", classifier_json(config.classifier)},
           {"top_k", config.top_k ? json(*config.top_k) : json(nullptr)},
           {"repeats", config.repeats},
           {"lambda_list", config.lambda_list},
           {"stability_runs", config.stability_runs},
           {"folds", config.folds},
           {"out", config.out_dir},
           {"seed", config.seed},
           {"standardize", config.standardize},
           {"jobs", config.jobs}};
    return j.dump(2) + "\n";
}

}  // namespace sce
