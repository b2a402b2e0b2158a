#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sce/classifier.hpp"
#include "sce/dataset.hpp"
#include "sce/network.hpp"
#include "sce/pipeline.hpp"

namespace sce {

/// Configuration mistakes (bad field values, missing files). The CLI maps
/// these to exit status 2; runtime failures exit 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // Data source: either one CSV plus a split spec, or explicit per-part
    // files. Exactly one of the two modes may be configured.
    std::string data_path;
    std::optional<std::string> train_path;
    std::optional<std::string> validation_path;
    std::optional<std::string> test_path;
    std::string label_column = "label";
    MissingPolicy missing = MissingPolicy::fail;
    SplitSpec split;

    SceHyperparams hyper;
    SweepGrid grid;
    ClassifierConfig classifier;

    std::optional<int> top_k;
    int repeats = 20;
    std::vector<double> lambda_list;  // analyze-lambda rows
    int stability_runs = 2;
    int folds = 0;  // 0: plain validation split; >= 2: cross-validated sweep

    std::string out_dir = "sce-run";
    std::uint64_t seed = 0;
    bool standardize = true;
    int jobs = 1;

    bool explicit_paths() const { return train_path.has_value(); }

    /// Throws ConfigError naming the offending field. Referenced files must
    /// exist at validation time.
    void validate() const;
};

/// Parse a config file (JSON, schema_version 1). Unknown fields are errors.
RunConfig config_from_json(const std::string& text);

/// Full echo of the configuration; re-parses to an equivalent RunConfig.
std::string config_to_json(const RunConfig& config);

}  // namespace sce
