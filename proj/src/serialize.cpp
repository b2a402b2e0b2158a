#include "sce/serialize.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace sce {

namespace {

using nlohmann::json;

constexpr int kSchemaVersion = 1;

json hyper_to_json(const SceHyperparams& hyper) {
    return json{{"lambda", hyper.lambda},
                {"hidden_layers", hyper.hidden_layers},
                {"hidden_width", hyper.hidden_width},
                {"scg_iterations", hyper.scg_iterations},
                {"centers_per_class", hyper.centers_per_class},
                {"seed", hyper.seed}};
}

SceHyperparams hyper_from_json(const json& j) {
    SceHyperparams hyper;
    hyper.lambda = j.at("lambda").get<double>();
    hyper.hidden_layers = j.at("hidden_layers").get<int>();
    hyper.hidden_width = j.at("hidden_width").get<int>();
    hyper.scg_iterations = j.at("scg_iterations").get<int>();
    hyper.centers_per_class = j.at("centers_per_class").get<int>();
    hyper.seed = j.at("seed").get<std::uint64_t>();
    hyper.validate();
    return hyper;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return v;
}

void require_kind(const json& j, const std::string& kind) {
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
        throw std::runtime_error("unsupported schema_version in " + kind);
    }
    if (j.at("kind").get<std::string>() != kind) {
        throw std::runtime_error("expected a " + kind + " document");
    }
}

}  // namespace

std::string model_to_json(const SceModel& model, const SceHyperparams& hyper,
                          const StandardizationParams& standardizer, bool standardized) {
    const Eigen::VectorXd theta = pack(model);
    if (!theta.allFinite()) throw std::runtime_error("model: non-finite weight");
    const ParamShape shape = shape_of(model);

    json dims = json::array();
    for (const auto& [rows, cols] : shape.layer_dims) dims.push_back({rows, cols});

    json j{{"schema_version", kSchemaVersion},
           {"kind", "sce_model"},
           {"hyperparams", hyper_to_json(hyper)},
           {"shape", json{{"input_dim", shape.input_dim}, {"layer_dims", dims}}},
           {"theta", vector_to_json(theta)},
           {"standardizer", json{{"mean", vector_to_json(standardizer.mean)},
                                 {"scale", vector_to_json(standardizer.scale)}}},
           {"standardized", standardized}};
    return j.dump(2) + "\n";
}

LoadedModel model_from_json(const std::string& text) {
    const json j = json::parse(text);
    require_kind(j, "sce_model");

    ParamShape shape;
    shape.input_dim = j.at("shape").at("input_dim").get<Eigen::Index>();
    for (const auto& pair : j.at("shape").at("layer_dims")) {
        shape.layer_dims.emplace_back(pair.at(0).get<Eigen::Index>(),
                                      pair.at(1).get<Eigen::Index>());
    }
    const Eigen::VectorXd theta = vector_from_json(j.at("theta"));
    if (theta.size() != shape.total()) {
        throw std::runtime_error("model: theta length does not match shape");
    }

    LoadedModel loaded;
    loaded.model = unpack(theta, shape);
    loaded.hyper = hyper_from_json(j.at("hyperparams"));
    loaded.standardizer.mean = vector_from_json(j.at("standardizer").at("mean"));
    loaded.standardizer.scale = vector_from_json(j.at("standardizer").at("scale"));
    loaded.standardized = j.at("standardized").get<bool>();
    if (loaded.standardizer.mean.size() != shape.input_dim ||
        loaded.standardizer.scale.size() != shape.input_dim) {
        throw std::runtime_error("model: standardizer length does not match input_dim");
    }
    return loaded;
}

std::string report_to_json(const EvaluationReport& report) {
    json j{{"schema_version", kSchemaVersion},
           {"kind", "evaluation_report"},
           {"accuracies", report.accuracies},
           {"mean", report.mean},
           {"std_dev", report.std_dev},
           {"repeats", report.repeats},
           {"selected_count", report.selected_count},
           {"hidden_width", report.hidden_width},
           {"seed", report.seed},
           {"config", json{{"learning_rate", report.config.learning_rate},
                           {"momentum", report.config.momentum},
                           {"batch_size", report.config.batch_size},
                           {"max_epochs", report.config.max_epochs},
                           {"patience", report.config.patience}}}};
    return j.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
    const json j = json::parse(text);
    require_kind(j, "evaluation_report");
    EvaluationReport report;
    report.accuracies = j.at("accuracies").get<std::vector<double>>();
    report.mean = j.at("mean").get<double>();
    report.std_dev = j.at("std_dev").get<double>();
    report.repeats = j.at("repeats").get<int>();
    report.selected_count = j.at("selected_count").get<int>();
    report.hidden_width = j.at("hidden_width").get<int>();
    report.seed = j.at("seed").get<std::uint64_t>();
    const json& config = j.at("config");
    report.config.learning_rate = config.at("learning_rate").get<double>();
    report.config.momentum = config.at("momentum").get<double>();
    report.config.batch_size = config.at("batch_size").get<int>();
    report.config.max_epochs = config.at("max_epochs").get<int>();
    report.config.patience = config.at("patience").get<int>();
    return report;
}

std::string run_record_to_json(const RunRecord& record) {
    json j{{"schema_version", kSchemaVersion},
           {"kind", "run_record"},
           {"hyperparams", hyper_to_json(record.hyper)},
           {"scg", json{{"accepted", record.scg_accepted}, {"aborted", record.scg_aborted}}},
           {"final_cost", record.final_cost},
           {"centroid_term", record.centroid_term},
           {"l1_term", record.l1_term},
           {"spl_l1", record.spl_l1},
           {"selected_count", record.selected_count},
           {"selected", record.ranking.selected},
           {"elbow_index",
            record.ranking.elbow_index ? json(*record.ranking.elbow_index) : json(nullptr)},
           {"validation_accuracy", record.validation_accuracy ? json(*record.validation_accuracy)
                                                              : json(nullptr)},
           {"wall_seconds", record.wall_seconds}};
    return j.dump(2) + "\n";
}

std::string stability_to_json(const StabilityReport& report) {
    json j{{"schema_version", kSchemaVersion},
           {"kind", "stability_report"},
           {"selected_sets", report.selected_sets},
           {"jaccard", report.jaccard},
           {"intersection_sizes", report.intersection_sizes},
           {"mean_pairwise_jaccard", report.mean_pairwise_jaccard}};
    return j.dump(2) + "\n";
}

std::string error_record(const std::string& command, const std::string& message) {
    return json{{"error", json{{"command", command}, {"message", message}}}}.dump() + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace sce
