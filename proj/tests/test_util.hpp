#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "sce/dataset.hpp"

namespace test_util {

/// Unique scratch directory, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        static std::atomic<unsigned> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path = base / ("sce-test-" + std::to_string(::getpid()) + "-" +
                       std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

/// Two-class Gaussian blobs with class-dependent means in the first
/// `informative` columns and pure noise elsewhere. Class c has mean
/// +separation/2 (c=0) or -separation/2 (c=1) on informative columns.
inline sce::Dataset two_class_blobs(int per_class, int dim, int informative, double separation,
                                    unsigned seed, double noise = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, noise);
    sce::Dataset data;
    data.features.resize(2 * per_class, dim);
    data.labels.reserve(2 * static_cast<std::size_t>(per_class));
    for (int i = 0; i < 2 * per_class; ++i) {
        const int label = i < per_class ? 0 : 1;
        const double shift = label == 0 ? separation / 2.0 : -separation / 2.0;
        for (int d = 0; d < dim; ++d) {
            data.features(i, d) = normal(gen) + (d < informative ? shift : 0.0);
        }
        data.labels.push_back(label);
    }
    for (int d = 0; d < dim; ++d) data.feature_names.push_back("f" + std::to_string(d));
    data.class_names = {"neg", "pos"};
    return data;
}

/// Three classes, each a mixture of two well-separated Gaussians. Column 0
/// separates class 0 (mean +c) from classes 1 and 2 (mean -c). Column 1+j
/// carries class j's modes at -2c and +2c, which cancel to an exactly zero
/// class mean. Classes 1 and 2 reuse the same noise draws, so their class
/// means agree exactly and only the mode columns can tell them apart.
/// Single-centroid targets therefore shed the mode columns while per-mode
/// targets keep them, so the value of k is observable through the selected
/// features. Needs dim >= 5.
inline sce::Dataset three_class_bimodal(int per_mode, int dim, double c, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal;
    sce::Dataset data;
    data.features.resize(6 * per_mode, dim);
    Eigen::MatrixXd shared(2 * per_mode, dim);
    for (Eigen::Index i = 0; i < shared.rows(); ++i)
        for (int d = 0; d < dim; ++d) shared(i, d) = normal(gen);
    Eigen::Index row = 0;
    for (int j = 0; j < 3; ++j) {
        Eigen::Index class_row = 0;
        for (int mode = 0; mode < 2; ++mode) {
            const double sign = mode == 0 ? 1.0 : -1.0;
            for (int i = 0; i < per_mode; ++i, ++row, ++class_row) {
                for (int d = 0; d < dim; ++d) {
                    double shift = 0.0;
                    if (d == 0) shift = j == 0 ? c : -c;
                    if (d == 1 + j) shift = sign * 2.0 * c;
                    const double noise = j == 0 ? normal(gen) : shared(class_row, d);
                    data.features(row, d) = noise + shift;
                }
                data.labels.push_back(j);
            }
        }
    }
    for (int d = 0; d < dim; ++d) data.feature_names.push_back("f" + std::to_string(d));
    data.class_names = {"a", "b", "c"};
    return data;
}

/// Every feature column is constant, so the standardized matrix is exactly
/// zero and every sparsity weight follows the same trajectory during
/// training. The magnitude curve comes out flat and the strict elbow cut
/// selects nothing.
inline sce::Dataset constant_dataset(int n, int dim) {
    sce::Dataset data;
    data.features.resize(n, dim);
    for (Eigen::Index d = 0; d < dim; ++d) data.features.col(d).setConstant(double(d) + 1.0);
    for (int i = 0; i < n; ++i) data.labels.push_back(i % 2);
    for (int d = 0; d < dim; ++d) data.feature_names.push_back("f" + std::to_string(d));
    data.class_names = {"x", "y"};
    return data;
}

}  // namespace test_util
