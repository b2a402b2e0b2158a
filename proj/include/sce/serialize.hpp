#pragma once

#include <string>

#include "sce/classifier.hpp"
#include "sce/cutoff.hpp"
#include "sce/network.hpp"
#include "sce/pipeline.hpp"

namespace sce {

/// Model as JSON. Weights keep 17 significant digits, enough for an exact
/// double round trip.
std::string model_to_json(const SceModel& model, const SceHyperparams& hyper,
                          const StandardizationParams& standardizer, bool standardized);

struct LoadedModel {
    SceModel model;
    SceHyperparams hyper;
    StandardizationParams standardizer;
    bool standardized = true;
};

LoadedModel model_from_json(const std::string& text);

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

std::string run_record_to_json(const RunRecord& record);

std::string stability_to_json(const StabilityReport& report);

/// Machine-readable failure record for nonzero CLI exits.
std::string error_record(const std::string& command, const std::string& message);

/// Write text to path atomically enough for our purposes (truncate+write),
/// creating parent directories first. Throws std::runtime_error on failure.
void write_text_file(const std::string& path, const std::string& text);

std::string read_text_file(const std::string& path);

}  // namespace sce
