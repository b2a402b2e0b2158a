#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sce {

struct FeatureRanking {
    std::vector<int> order;          // feature indices, |spl| descending
    std::vector<double> sorted_abs;  // magnitudes in the same order
    std::optional<int> elbow_index;  // absent when D < 3 (no elbow; all selected)
    std::vector<int> selected;       // indices with magnitude strictly above the elbow's

    void validate() const;
};

/// Sort feature indices by |spl| descending; ties broken by ascending index.
void rank_features(const Eigen::VectorXd& spl, std::vector<int>& order,
                   std::vector<double>& sorted_abs);

/// Elbow of a non-increasing curve: with points (i, y_i) and the chord from
/// (0, y_0) to (D-1, y_{D-1}), returns the index of maximum perpendicular
/// distance to the chord, ties broken by smallest index. Requires length >= 3.
int elbow_index(const std::vector<double>& sorted_abs);

/// Rank, find the elbow, and keep features strictly above the elbow magnitude.
/// Curves shorter than 3 have no elbow and select every feature.
FeatureRanking select_features(const Eigen::VectorXd& spl);

/// First k entries of a ranking order. Requires 1 <= k <= D.
std::vector<int> top_k(const std::vector<int>& order, int k);

/// CSV rows (rank, feature_index, feature_name, abs_weight, selected_flag).
std::string ranking_csv(const FeatureRanking& ranking,
                        const std::vector<std::string>& feature_names);

}  // namespace sce
