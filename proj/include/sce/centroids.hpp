#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "sce/dataset.hpp"
#include "sce/rng.hpp"

namespace sce {

/// Per-class centroid set plus the fixed sample -> target assignment.
/// Targets never cross a class boundary: assignment[i].class_index equals
/// labels[i] for every sample.
struct CentroidMap {
    struct Assignment {
        int class_index = 0;
        int centroid_index = 0;
    };

    std::vector<Eigen::MatrixXd> centroids;  // per class: k_j x D
    std::vector<Assignment> assignment;      // length N

    void validate(const Dataset& data) const;
};

/// One centroid per class: the arithmetic mean of the class rows.
CentroidMap class_means(const Dataset& data);

/// Lloyd iterations on one point set. Forgy init: k distinct rows drawn from
/// rng. Empty clusters are repaired by moving the sample farthest from its
/// assigned centroid. cost_history records the within-set cost after each
/// assignment+update pass.
struct LloydResult {
    Eigen::MatrixXd centroids;  // k x D
    std::vector<int> assignment;
    std::vector<double> cost_history;
};

LloydResult lloyd(const Eigen::MatrixXd& points, int k, Rng& rng, int max_iters, double tol);

/// k centroids per class via within-class k-means; k = 1 falls back to
/// class_means exactly. Each class runs on its own sub-generator derived
/// from (seed, class index).
CentroidMap kmeans_per_class(const Dataset& data, int k, std::uint64_t seed,
                             int max_iters = 300, double tol = 1e-6);

/// Row i = the centroid vector assigned to sample i.
Eigen::MatrixXd targets_for(const CentroidMap& map, const Dataset& data);

}  // namespace sce
