#include "sce/centroids.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sce {

namespace {

int nearest_row(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& point) {
    int best = 0;
    double best_dist = (centroids.row(0) - point).squaredNorm();
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
        const double dist = (centroids.row(c) - point).squaredNorm();
        if (dist < best_dist) {
            best_dist = dist;
            best = static_cast<int>(c);
        }
    }
    return best;
}

double assignment_cost(const Eigen::MatrixXd& points, const Eigen::MatrixXd& centroids,
                       const std::vector<int>& assignment) {
    double cost = 0.0;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        cost += (points.row(i) - centroids.row(assignment[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return cost;
}

// Lexicographic row order. Centroid computation walks rows in this order, so
// the result is a function of the row multiset, not of file order.
std::vector<Eigen::Index> lexicographic_row_order(const Eigen::MatrixXd& points) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index d = 0; d < points.cols(); ++d) {
            if (points(a, d) != points(b, d)) return points(a, d) < points(b, d);
        }
        return a < b;
    });
    return order;
}

}  // namespace

void CentroidMap::validate(const Dataset& data) const {
    if (assignment.size() != static_cast<std::size_t>(data.n()))
        throw std::invalid_argument("centroid map: assignment length mismatch");
    if (centroids.size() != static_cast<std::size_t>(data.num_classes()))
        throw std::invalid_argument("centroid map: class count mismatch");
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i].class_index != data.labels[i])
            throw std::invalid_argument("centroid map: target crosses class boundary");
        const auto& class_centroids = centroids[static_cast<std::size_t>(assignment[i].class_index)];
        if (assignment[i].centroid_index < 0 || assignment[i].centroid_index >= class_centroids.rows())
            throw std::invalid_argument("centroid map: centroid index out of range");
    }
}

CentroidMap class_means(const Dataset& data) {
    data.validate();
    CentroidMap map;
    map.centroids.resize(static_cast<std::size_t>(data.num_classes()));
    map.assignment.resize(static_cast<std::size_t>(data.n()));

    for (int j = 0; j < data.num_classes(); ++j) {
        const auto rows = data.class_indices(j);
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(data.dim());
        for (Eigen::Index i : rows) mean += data.features.row(i);
        mean /= static_cast<double>(rows.size());
        map.centroids[static_cast<std::size_t>(j)] = mean;
    }
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        map.assignment[static_cast<std::size_t>(i)] = {data.labels[static_cast<std::size_t>(i)], 0};
    }
    return map;
}

LloydResult lloyd(const Eigen::MatrixXd& points, int k, Rng& rng, int max_iters, double tol) {
    const Eigen::Index n = points.rows();
    if (k < 1) throw std::invalid_argument("lloyd: k must be positive");
    if (n < k) throw std::invalid_argument("lloyd: fewer points than clusters");

    LloydResult result;
    const auto seeds = rng.sample_without_replacement(static_cast<std::size_t>(n),
                                                      static_cast<std::size_t>(k));
    result.centroids.resize(k, points.cols());
    for (int c = 0; c < k; ++c) {
        result.centroids.row(c) = points.row(static_cast<Eigen::Index>(seeds[static_cast<std::size_t>(c)]));
    }
    result.assignment.assign(static_cast<std::size_t>(n), 0);
    std::vector<int> previous_assignment;

    const auto assign_and_repair = [&]() {
        for (Eigen::Index i = 0; i < n; ++i) {
            result.assignment[static_cast<std::size_t>(i)] = nearest_row(result.centroids, points.row(i));
        }
        // Repair empty clusters so every centroid keeps at least one member.
        std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
        for (int a : result.assignment) ++counts[static_cast<std::size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index farthest = -1;
            double farthest_dist = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const int a = result.assignment[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(a)] <= 1) continue;  // donors stay nonempty
                const double dist = (points.row(i) - result.centroids.row(a)).squaredNorm();
                if (dist > farthest_dist) {
                    farthest_dist = dist;
                    farthest = i;
                }
            }
            if (farthest < 0) throw std::runtime_error("lloyd: cannot repair empty cluster");
            --counts[static_cast<std::size_t>(result.assignment[static_cast<std::size_t>(farthest)])];
            result.assignment[static_cast<std::size_t>(farthest)] = c;
            ++counts[static_cast<std::size_t>(c)];
        }
        return counts;
    };

    bool fixed_point = false;
    for (int iter = 0; iter < max_iters; ++iter) {
        const auto counts = assign_and_repair();

        // Unchanged assignments mean an exact fixed point: centroids already
        // equal the member means and each point sits with its nearest one.
        if (result.assignment == previous_assignment) {
            fixed_point = true;
            break;
        }
        previous_assignment = result.assignment;

        Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(k, points.cols());
        for (Eigen::Index i = 0; i < n; ++i) {
            updated.row(result.assignment[static_cast<std::size_t>(i)]) += points.row(i);
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            updated.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
            shift = std::max(shift, (updated.row(c) - result.centroids.row(c)).norm());
        }
        result.centroids = updated;
        result.cost_history.push_back(assignment_cost(points, result.centroids, result.assignment));
        if (shift < tol) break;
    }
    // Keep the returned assignment consistent with the returned centroids
    // when the loop stopped on the shift tolerance or the iteration cap.
    if (!fixed_point) assign_and_repair();
    return result;
}

CentroidMap kmeans_per_class(const Dataset& data, int k, std::uint64_t seed, int max_iters,
                             double tol) {
    if (k < 1) throw std::invalid_argument("kmeans_per_class: k must be positive");
    if (k == 1) return class_means(data);
    data.validate();

    CentroidMap map;
    map.centroids.resize(static_cast<std::size_t>(data.num_classes()));
    map.assignment.resize(static_cast<std::size_t>(data.n()));

    for (int j = 0; j < data.num_classes(); ++j) {
        const auto rows = data.class_indices(j);
        if (rows.size() < static_cast<std::size_t>(k))
            throw std::invalid_argument("kmeans_per_class: class " +
                                        data.class_names[static_cast<std::size_t>(j)] +
                                        " has fewer samples than centers");
        Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()), data.dim());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            points.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
        }
        const auto order = lexicographic_row_order(points);
        Eigen::MatrixXd canonical(points.rows(), points.cols());
        for (std::size_t i = 0; i < order.size(); ++i) {
            canonical.row(static_cast<Eigen::Index>(i)) = points.row(order[i]);
        }

        Rng rng(mix_seed(seed, SeedStream::kmeans, static_cast<std::uint64_t>(j)));
        const auto run = lloyd(canonical, k, rng, max_iters, tol);
        map.centroids[static_cast<std::size_t>(j)] = run.centroids;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const Eigen::Index original = rows[static_cast<std::size_t>(order[i])];
            map.assignment[static_cast<std::size_t>(original)] = {j, run.assignment[i]};
        }
    }
    return map;
}

Eigen::MatrixXd targets_for(const CentroidMap& map, const Dataset& data) {
    map.validate(data);
    for (const auto& class_centroids : map.centroids) {
        if (class_centroids.cols() != data.dim())
            throw std::invalid_argument("targets_for: dimension mismatch");
    }
    Eigen::MatrixXd targets(data.n(), data.dim());
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const auto& a = map.assignment[static_cast<std::size_t>(i)];
        targets.row(i) = map.centroids[static_cast<std::size_t>(a.class_index)].row(a.centroid_index);
    }
    return targets;
}

}  // namespace sce
