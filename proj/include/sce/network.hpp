#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace sce {

/// Table-driven hyperparameter ranges used by the sweep defaults.
namespace grids {
inline const std::vector<int> scg_iterations{25, 50, 75, 100};
inline const std::vector<int> hidden_layers{1, 2};
inline const std::vector<int> hidden_widths{50, 100, 200, 250, 500};
inline const std::vector<double> lambdas{0.01, 0.001, 0.0001, 0.0002, 0.0004, 0.0006, 0.0008};
inline const std::vector<int> centers_per_class{1, 2, 3, 4, 5};
}  // namespace grids

struct SceHyperparams {
    double lambda = 0.001;      // l1 weight on the sparsity layer, >= 0
    int hidden_layers = 1;      // 1 or 2
    int hidden_width = 50;
    int scg_iterations = 100;
    int centers_per_class = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DenseLayer {
    Eigen::MatrixXd weights;  // out x in
    Eigen::VectorXd bias;     // out
};

/// Centroid-mapping network: a diagonal, bias-free sparsity layer on the
/// input, tanh hidden layers, and a linear output of width D. The sparsity
/// layer weight magnitudes are the feature scores.
struct SceModel {
    Eigen::VectorXd spl;            // length D, one weight per input feature
    std::vector<DenseLayer> layers; // D -> H [-> H] -> D

    Eigen::Index input_dim() const { return spl.size(); }
};

/// spl = all ones; dense weights uniform on +-sqrt(6/(fan_in+fan_out)) drawn
/// layer by layer, row-major; biases zero. Deterministic given hyper.seed.
SceModel init_model(Eigen::Index input_dim, const SceHyperparams& hyper);

struct ForwardCache {
    Eigen::MatrixXd spl_output;          // N x D
    std::vector<Eigen::MatrixXd> hidden; // tanh activations per hidden layer
    Eigen::MatrixXd output;              // N x D
};

Eigen::MatrixXd forward_batch(const SceModel& model, const Eigen::MatrixXd& batch,
                              ForwardCache* cache = nullptr);
Eigen::VectorXd forward(const SceModel& model, const Eigen::VectorXd& x);

/// (1/2N) sum_i ||target_i - f(x_i)||^2 + lambda * ||spl||_1
double loss_sce(const SceModel& model, const Eigen::MatrixXd& batch,
                const Eigen::MatrixXd& targets, double lambda);

/// Exact reverse-mode gradient of the smooth term; the l1 term contributes
/// lambda * sign(spl_d) with sign(0) = 0. Entries are in pack() order.
Eigen::VectorXd grad_sce(const SceModel& model, const Eigen::MatrixXd& batch,
                         const Eigen::MatrixXd& targets, double lambda);

/// Loss and gradient from one forward/backward pass.
double loss_grad_sce(const SceModel& model, const Eigen::MatrixXd& batch,
                     const Eigen::MatrixXd& targets, double lambda, Eigen::VectorXd& grad);

/// Shape descriptor for the flat parameter vector: spl first, then each
/// layer's weights row-major followed by its bias.
struct ParamShape {
    Eigen::Index input_dim = 0;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> layer_dims;  // (out, in)

    Eigen::Index total() const;
};

ParamShape shape_of(const SceModel& model);
Eigen::VectorXd pack(const SceModel& model);
SceModel unpack(const Eigen::VectorXd& theta, const ParamShape& shape);

}  // namespace sce
