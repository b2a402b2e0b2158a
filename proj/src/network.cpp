#include "sce/network.hpp"

#include <cmath>
#include <stdexcept>

#include "sce/rng.hpp"

namespace sce {

void SceHyperparams::validate() const {
    if (lambda < 0) throw std::invalid_argument("hyperparams: lambda must be >= 0");
    if (hidden_layers != 1 && hidden_layers != 2)
        throw std::invalid_argument("hyperparams: hidden_layers must be 1 or 2");
    if (hidden_width < 1) throw std::invalid_argument("hyperparams: hidden_width must be >= 1");
    if (scg_iterations < 1) throw std::invalid_argument("hyperparams: scg_iterations must be >= 1");
    if (centers_per_class < 1)
        throw std::invalid_argument("hyperparams: centers_per_class must be >= 1");
}

SceModel init_model(Eigen::Index input_dim, const SceHyperparams& hyper) {
    hyper.validate();
    if (input_dim < 1) throw std::invalid_argument("init_model: input_dim must be >= 1");

    SceModel model;
    model.spl = Eigen::VectorXd::Ones(input_dim);

    std::vector<Eigen::Index> widths;
    widths.push_back(input_dim);
    for (int l = 0; l < hyper.hidden_layers; ++l) widths.push_back(hyper.hidden_width);
    widths.push_back(input_dim);

    Rng rng(mix_seed(hyper.seed, SeedStream::init));
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const Eigen::Index fan_in = widths[l];
        const Eigen::Index fan_out = widths[l + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        DenseLayer layer;
        layer.weights.resize(fan_out, fan_in);
        for (Eigen::Index r = 0; r < fan_out; ++r) {
            for (Eigen::Index c = 0; c < fan_in; ++c) {
                layer.weights(r, c) = rng.uniform(-bound, bound);
            }
        }
        layer.bias = Eigen::VectorXd::Zero(fan_out);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

Eigen::MatrixXd forward_batch(const SceModel& model, const Eigen::MatrixXd& batch,
                              ForwardCache* cache) {
    if (batch.cols() != model.input_dim())
        throw std::invalid_argument("forward: batch width does not match model input dim");
    if (model.layers.empty()) throw std::invalid_argument("forward: model has no layers");

    Eigen::MatrixXd activation = batch.array().rowwise() * model.spl.transpose().array();
    if (cache) {
        cache->spl_output = activation;
        cache->hidden.clear();
    }
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        activation = ((activation * layer.weights.transpose()).rowwise() + layer.bias.transpose())
                         .array()
                         .tanh();
        if (cache) cache->hidden.push_back(activation);
    }
    const auto& out = model.layers.back();
    Eigen::MatrixXd output = (activation * out.weights.transpose()).rowwise() + out.bias.transpose();
    if (cache) cache->output = output;
    return output;
}

Eigen::VectorXd forward(const SceModel& model, const Eigen::VectorXd& x) {
    return forward_batch(model, x.transpose()).row(0);
}

double loss_sce(const SceModel& model, const Eigen::MatrixXd& batch,
                const Eigen::MatrixXd& targets, double lambda) {
    if (batch.rows() == 0) throw std::invalid_argument("loss_sce: empty batch");
    if (batch.rows() != targets.rows() || batch.cols() != targets.cols())
        throw std::invalid_argument("loss_sce: batch/target shape mismatch");
    const Eigen::MatrixXd output = forward_batch(model, batch);
    const double centroid_term =
        (targets - output).squaredNorm() / (2.0 * static_cast<double>(batch.rows()));
    return centroid_term + lambda * model.spl.template lpNorm<1>();
}

double loss_grad_sce(const SceModel& model, const Eigen::MatrixXd& batch,
                     const Eigen::MatrixXd& targets, double lambda, Eigen::VectorXd& grad) {
    if (batch.rows() == 0) throw std::invalid_argument("grad_sce: empty batch");
    if (batch.rows() != targets.rows() || batch.cols() != targets.cols())
        throw std::invalid_argument("grad_sce: batch/target shape mismatch");

    ForwardCache cache;
    forward_batch(model, batch, &cache);
    const double n = static_cast<double>(batch.rows());
    const double loss = (targets - cache.output).squaredNorm() / (2.0 * n) +
                        lambda * model.spl.template lpNorm<1>();

    const ParamShape shape = shape_of(model);
    grad.resize(shape.total());

    const std::size_t num_layers = model.layers.size();
    std::vector<Eigen::MatrixXd> weight_grads(num_layers);
    std::vector<Eigen::VectorXd> bias_grads(num_layers);

    // d loss / d output
    Eigen::MatrixXd delta = (cache.output - targets) / n;

    for (std::size_t l = num_layers; l-- > 0;) {
        const Eigen::MatrixXd& input =
            l == 0 ? cache.spl_output : cache.hidden[l - 1];
        weight_grads[l] = delta.transpose() * input;
        bias_grads[l] = delta.colwise().sum();
        if (l > 0) {
            // tanh'(z) = 1 - a^2, applied at the producing layer
            delta = (delta * model.layers[l].weights).array() *
                    (1.0 - cache.hidden[l - 1].array().square());
        } else {
            delta = delta * model.layers[0].weights;  // gradient wrt spl output
        }
    }

    // spl_d multiplies x_d elementwise; subgradient of |.| is sign with sign(0)=0
    Eigen::VectorXd spl_grad = (delta.array() * batch.array()).colwise().sum();
    for (Eigen::Index d = 0; d < model.spl.size(); ++d) {
        const double s = model.spl(d);
        spl_grad(d) += lambda * (s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0));
    }

    Eigen::Index cursor = 0;
    grad.segment(cursor, spl_grad.size()) = spl_grad;
    cursor += spl_grad.size();
    for (std::size_t l = 0; l < num_layers; ++l) {
        const auto& w = weight_grads[l];
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            grad.segment(cursor, w.cols()) = w.row(r);
            cursor += w.cols();
        }
        grad.segment(cursor, bias_grads[l].size()) = bias_grads[l];
        cursor += bias_grads[l].size();
    }
    return loss;
}

Eigen::VectorXd grad_sce(const SceModel& model, const Eigen::MatrixXd& batch,
                         const Eigen::MatrixXd& targets, double lambda) {
    Eigen::VectorXd grad;
    loss_grad_sce(model, batch, targets, lambda, grad);
    return grad;
}

Eigen::Index ParamShape::total() const {
    Eigen::Index count = input_dim;
    for (const auto& [rows, cols] : layer_dims) count += rows * cols + rows;
    return count;
}

ParamShape shape_of(const SceModel& model) {
    ParamShape shape;
    shape.input_dim = model.input_dim();
    for (const auto& layer : model.layers) {
        shape.layer_dims.emplace_back(layer.weights.rows(), layer.weights.cols());
    }
    return shape;
}

Eigen::VectorXd pack(const SceModel& model) {
    const ParamShape shape = shape_of(model);
    Eigen::VectorXd theta(shape.total());
    Eigen::Index cursor = 0;
    theta.segment(cursor, model.spl.size()) = model.spl;
    cursor += model.spl.size();
    for (const auto& layer : model.layers) {
        for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
            theta.segment(cursor, layer.weights.cols()) = layer.weights.row(r);
            cursor += layer.weights.cols();
        }
        theta.segment(cursor, layer.bias.size()) = layer.bias;
        cursor += layer.bias.size();
    }
    return theta;
}

SceModel unpack(const Eigen::VectorXd& theta, const ParamShape& shape) {
    if (theta.size() != shape.total())
        throw std::invalid_argument("unpack: parameter vector length mismatch");
    SceModel model;
    Eigen::Index cursor = 0;
    model.spl = theta.segment(cursor, shape.input_dim);
    cursor += shape.input_dim;
    for (const auto& [rows, cols] : shape.layer_dims) {
        DenseLayer layer;
        layer.weights.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            layer.weights.row(r) = theta.segment(cursor, cols);
            cursor += cols;
        }
        layer.bias = theta.segment(cursor, rows);
        cursor += rows;
        model.layers.push_back(std::move(layer));
    }
    return model;
}

}  // namespace sce
