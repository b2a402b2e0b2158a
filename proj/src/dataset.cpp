#include "sce/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "sce/rng.hpp"

namespace sce {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

bool is_missing_marker(const std::string& cell) {
    if (cell.empty()) return true;
    std::string lower(cell);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lower == "na" || lower == "nan";
}

bool parse_number(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return false;
    out = value;
    return true;
}

// RFC-4180 records: quoted fields may contain delimiters, newlines and
// doubled quotes. Accepts both LF and CRLF line ends.
std::vector<std::vector<std::string>> parse_csv_text(const std::string& text, char delimiter) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;

    std::size_t i = 0;
    if (text.size() >= 3 && text.compare(0, 3, "\xef\xbb\xbf") == 0) i = 3;  // UTF-8 BOM

    auto end_field = [&]() {
        record.push_back(field_was_quoted ? field : trim(field));
        field.clear();
        field_was_quoted = false;
    };
    auto end_record = [&]() {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !field_was_quoted) {
            in_quotes = true;
            field_was_quoted = true;
        } else if (c == delimiter) {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_record();
        } else {
            field.push_back(c);
        }
    }
    if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
    if (!field.empty() || field_was_quoted || !record.empty()) end_record();
    return records;
}

// Canonical within-group order: lexicographic by feature row, then label,
// then index. Makes split/fold assignment a function of row values rather
// than file order, so shuffled inputs produce identical part multisets.
std::vector<Eigen::Index> canonical_order(const Dataset& data,
                                          const std::vector<Eigen::Index>& group) {
    std::vector<Eigen::Index> order(group);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index d = 0; d < data.dim(); ++d) {
            if (data.features(a, d) != data.features(b, d))
                return data.features(a, d) < data.features(b, d);
        }
        if (data.labels[a] != data.labels[b]) return data.labels[a] < data.labels[b];
        return a < b;
    });
    return order;
}

// Floor counts per part, leftovers to train, then validation, then test;
// parts with fraction 0 take nothing.
std::array<std::size_t, 3> part_counts(std::size_t n, const SplitSpec& spec) {
    const std::array<double, 3> fractions = {spec.train_fraction, spec.validation_fraction,
                                             spec.test_fraction};
    std::array<std::size_t, 3> counts{};
    std::size_t assigned = 0;
    for (int p = 0; p < 3; ++p) {
        counts[p] = static_cast<std::size_t>(std::floor(fractions[p] * static_cast<double>(n)));
        assigned += counts[p];
    }
    // At most one leftover per nonempty part since each floor loses < 1.
    for (int p = 0; p < 3 && assigned < n; ++p) {
        if (fractions[p] > 0.0) {
            ++counts[p];
            ++assigned;
        }
    }
    return counts;
}

}  // namespace

void Dataset::validate() const {
    const auto n_rows = n();
    if (static_cast<std::size_t>(n_rows) != labels.size())
        throw std::invalid_argument("dataset: label count does not match row count");
    if (static_cast<std::size_t>(dim()) != feature_names.size())
        throw std::invalid_argument("dataset: feature name count does not match column count");
    const int m = num_classes();
    if (m < 1) throw std::invalid_argument("dataset: no classes");
    if (n_rows < m) throw std::invalid_argument("dataset: fewer samples than classes");
    std::vector<bool> seen(static_cast<std::size_t>(m), false);
    for (int label : labels) {
        if (label < 0 || label >= m) throw std::invalid_argument("dataset: label out of range");
        seen[static_cast<std::size_t>(label)] = true;
    }
    for (int j = 0; j < m; ++j) {
        if (!seen[static_cast<std::size_t>(j)])
            throw std::invalid_argument("dataset: class " + class_names[static_cast<std::size_t>(j)] +
                                        " has no samples");
    }
    if (!features.allFinite()) throw std::invalid_argument("dataset: non-finite feature value");
}

std::vector<Eigen::Index> Dataset::class_indices(int j) const {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n(); ++i) {
        if (labels[static_cast<std::size_t>(i)] == j) rows.push_back(i);
    }
    return rows;
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& rows) const {
    Dataset out;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), dim());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
        out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
    }
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

Dataset Dataset::select_columns(const std::vector<Eigen::Index>& cols) const {
    Dataset out;
    out.features.resize(n(), static_cast<Eigen::Index>(cols.size()));
    out.feature_names.reserve(cols.size());
    for (std::size_t d = 0; d < cols.size(); ++d) {
        if (cols[d] < 0 || cols[d] >= dim())
            throw std::out_of_range("dataset: column index out of range");
        out.features.col(static_cast<Eigen::Index>(d)) = features.col(cols[d]);
        out.feature_names.push_back(feature_names[static_cast<std::size_t>(cols[d])]);
    }
    out.labels = labels;
    out.class_names = class_names;
    return out;
}

Dataset load_csv(const std::string& path, const LabelColumn& label_column,
                 MissingPolicy missing_policy, char delimiter) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path);
    std::stringstream buffer;
    buffer << file.rdbuf();
    auto records = parse_csv_text(buffer.str(), delimiter);
    records.erase(std::remove_if(records.begin(), records.end(),
                                 [](const std::vector<std::string>& rec) {
                                     return rec.size() == 1 && rec.front().empty();
                                 }),
                  records.end());
    if (records.size() < 2) throw std::runtime_error(path + ": need a header row and at least one data row");

    const auto& header = records.front();
    const std::size_t num_columns = header.size();

    std::size_t label_index = num_columns;
    for (std::size_t c = 0; c < num_columns; ++c) {
        if (header[c] == label_column.spec) {
            label_index = c;
            break;
        }
    }
    if (label_index == num_columns) {
        int parsed = -1;
        const auto [ptr, ec] = std::from_chars(label_column.spec.data(),
                                               label_column.spec.data() + label_column.spec.size(),
                                               parsed);
        if (ec == std::errc{} && ptr == label_column.spec.data() + label_column.spec.size() &&
            parsed >= 0 && static_cast<std::size_t>(parsed) < num_columns) {
            label_index = static_cast<std::size_t>(parsed);
        } else {
            throw std::runtime_error(path + ": label column '" + label_column.spec + "' not found");
        }
    }

    Dataset data;
    for (std::size_t c = 0; c < num_columns; ++c) {
        if (c != label_index) data.feature_names.push_back(header[c]);
    }
    const std::size_t num_features = data.feature_names.size();
    if (num_features == 0) throw std::runtime_error(path + ": no feature columns");

    const std::size_t num_rows = records.size() - 1;
    data.features.resize(static_cast<Eigen::Index>(num_rows), static_cast<Eigen::Index>(num_features));
    data.labels.reserve(num_rows);

    std::unordered_map<std::string, int> class_ids;
    std::vector<std::vector<Eigen::Index>> missing_cells(num_features);

    for (std::size_t r = 0; r < num_rows; ++r) {
        const auto& row = records[r + 1];
        if (row.size() != num_columns)
            throw std::runtime_error(path + ": row " + std::to_string(r + 2) + " has " +
                                     std::to_string(row.size()) + " cells, expected " +
                                     std::to_string(num_columns));
        std::size_t d = 0;
        for (std::size_t c = 0; c < num_columns; ++c) {
            if (c == label_index) {
                const std::string& name = row[c];
                if (name.empty())
                    throw std::runtime_error(path + ": empty label in row " + std::to_string(r + 2));
                auto [it, inserted] = class_ids.try_emplace(name, static_cast<int>(data.class_names.size()));
                if (inserted) data.class_names.push_back(name);
                data.labels.push_back(it->second);
                continue;
            }
            double value = 0.0;
            if (parse_number(row[c], value)) {
                data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = value;
            } else if (is_missing_marker(row[c]) && missing_policy == MissingPolicy::mean_impute) {
                missing_cells[d].push_back(static_cast<Eigen::Index>(r));
                data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) =
                    std::numeric_limits<double>::quiet_NaN();
            } else {
                throw std::runtime_error(path + ": non-numeric cell '" + row[c] + "' in row " +
                                         std::to_string(r + 2) + ", column " + header[c]);
            }
            ++d;
        }
    }

    for (std::size_t d = 0; d < num_features; ++d) {
        if (missing_cells[d].empty()) continue;
        if (missing_cells[d].size() == num_rows)
            throw std::runtime_error(path + ": column " + data.feature_names[d] +
                                     " has no present values to impute from");
        double sum = 0.0;
        for (std::size_t r = 0; r < num_rows; ++r) {
            const double v = data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d));
            if (!std::isnan(v)) sum += v;
        }
        const double mean = sum / static_cast<double>(num_rows - missing_cells[d].size());
        for (Eigen::Index r : missing_cells[d]) {
            data.features(r, static_cast<Eigen::Index>(d)) = mean;
        }
    }

    if (data.num_classes() < 2) throw std::runtime_error(path + ": fewer than 2 classes");
    data.validate();
    return data;
}

StandardizationParams fit_standardizer(const Dataset& train) {
    if (train.n() == 0) throw std::invalid_argument("fit_standardizer: empty dataset");
    StandardizationParams params;
    params.mean = train.features.colwise().mean();
    const Eigen::MatrixXd centered = train.features.rowwise() - params.mean.transpose();
    params.scale = (centered.array().square().colwise().mean()).sqrt();
    for (Eigen::Index d = 0; d < params.scale.size(); ++d) {
        if (params.scale(d) < 1e-12) params.scale(d) = 1.0;
    }
    return params;
}

Dataset apply_standardizer(const StandardizationParams& params, const Dataset& data) {
    if (params.mean.size() != data.dim())
        throw std::invalid_argument("apply_standardizer: dimension mismatch");
    Dataset out = data;
    out.features = (data.features.rowwise() - params.mean.transpose()).array().rowwise() /
                   params.scale.transpose().array();
    return out;
}

Dataset invert_standardizer(const StandardizationParams& params, const Dataset& data) {
    if (params.mean.size() != data.dim())
        throw std::invalid_argument("invert_standardizer: dimension mismatch");
    Dataset out = data;
    out.features =
        (data.features.array().rowwise() * params.scale.transpose().array()).rowwise() +
        params.mean.transpose().array();
    return out;
}

void SplitSpec::validate() const {
    if (train_fraction < 0 || validation_fraction < 0 || test_fraction < 0)
        throw std::invalid_argument("split: negative fraction");
    const double sum = train_fraction + validation_fraction + test_fraction;
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("split: fractions sum to " + std::to_string(sum) + ", not 1");
}

SplitIndices split_indices(const Dataset& data, const SplitSpec& spec) {
    spec.validate();
    data.validate();

    int nonempty_parts = 0;
    for (double f : {spec.train_fraction, spec.validation_fraction, spec.test_fraction}) {
        if (f > 0.0) ++nonempty_parts;
    }

    std::vector<std::vector<Eigen::Index>> groups;
    if (spec.stratified) {
        for (int j = 0; j < data.num_classes(); ++j) {
            auto rows = data.class_indices(j);
            if (rows.size() < static_cast<std::size_t>(nonempty_parts))
                throw std::invalid_argument("split: class " + data.class_names[static_cast<std::size_t>(j)] +
                                            " too small for stratification");
            groups.push_back(std::move(rows));
        }
    } else {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(data.n()));
        for (Eigen::Index i = 0; i < data.n(); ++i) all[static_cast<std::size_t>(i)] = i;
        groups.push_back(std::move(all));
    }

    SplitIndices result;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto order = canonical_order(data, groups[g]);
        Rng rng(mix_seed(spec.seed, SeedStream::split, g));
        rng.shuffle(order);
        const auto counts = part_counts(order.size(), spec);
        std::size_t cursor = 0;
        for (std::size_t i = 0; i < counts[0]; ++i) result.train.push_back(order[cursor++]);
        for (std::size_t i = 0; i < counts[1]; ++i) result.validation.push_back(order[cursor++]);
        for (std::size_t i = 0; i < counts[2]; ++i) result.test.push_back(order[cursor++]);
    }
    std::sort(result.train.begin(), result.train.end());
    std::sort(result.validation.begin(), result.validation.end());
    std::sort(result.test.begin(), result.test.end());
    return result;
}

SplitSets split(const Dataset& data, const SplitSpec& spec) {
    const auto indices = split_indices(data, spec);
    return SplitSets{data.select_rows(indices.train), data.select_rows(indices.validation),
                     data.select_rows(indices.test)};
}

FoldPlan make_folds(const Dataset& data, int k, std::uint64_t seed) {
    data.validate();
    if (k < 2) throw std::invalid_argument("make_folds: need at least 2 folds");

    FoldPlan plan;
    plan.fold_count = k;
    plan.seed = seed;
    plan.held_out.resize(static_cast<std::size_t>(k));

    for (int j = 0; j < data.num_classes(); ++j) {
        auto rows = data.class_indices(j);
        if (rows.size() < static_cast<std::size_t>(k))
            throw std::invalid_argument("make_folds: class " + data.class_names[static_cast<std::size_t>(j)] +
                                        " has fewer samples than folds");
        auto order = canonical_order(data, rows);
        Rng rng(mix_seed(seed, SeedStream::folds, static_cast<std::uint64_t>(j)));
        rng.shuffle(order);
        const std::size_t base = order.size() / static_cast<std::size_t>(k);
        const std::size_t rem = order.size() % static_cast<std::size_t>(k);
        std::size_t cursor = 0;
        for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f) {
            const std::size_t take = base + (f < rem ? 1 : 0);
            for (std::size_t i = 0; i < take; ++i) plan.held_out[f].push_back(order[cursor++]);
        }
    }
    for (auto& fold : plan.held_out) std::sort(fold.begin(), fold.end());
    return plan;
}

}  // namespace sce
