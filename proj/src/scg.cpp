#include "sce/scg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sce {

namespace {

constexpr int kMaxConsecutiveFailures = 20;
constexpr double kLambdaCeiling = 1e100;

bool finite(double v) { return std::isfinite(v); }

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

void ScgConfig::validate() const {
    if (max_iterations < 0) throw std::invalid_argument("scg: max_iterations must be >= 0");
    if (!(sigma0 > 0.0)) throw std::invalid_argument("scg: sigma0 must be positive");
    if (!(lambda_init > 0.0)) throw std::invalid_argument("scg: lambda_init must be positive");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("scg: tolerance must be non-negative");
}

ScgResult minimize(const ScgObjective& objective, const Eigen::VectorXd& theta0,
                   const ScgConfig& config) {
    config.validate();
    const Eigen::Index n = theta0.size();
    if (n == 0) throw std::invalid_argument("scg: theta0 is empty");

    Eigen::VectorXd w = theta0;
    Eigen::VectorXd grad(n);
    double cost = objective(w, grad);
    if (!finite(cost) || !finite(grad)) {
        throw std::invalid_argument("scg: non-finite cost or gradient at theta0");
    }

    ScgResult result;
    result.theta = w;
    result.cost = cost;

    Eigen::VectorXd r = -grad;        // steepest descent direction
    Eigen::VectorXd p = r;            // search direction
    double lambda = config.lambda_init;
    double lambda_bar = 0.0;
    double delta = 0.0;               // scaled curvature, carried across failed steps
    bool success = true;
    int consecutive_failures = 0;

    Eigen::VectorXd probe_grad(n);
    Eigen::VectorXd trial_grad(n);

    if (r.norm() < config.tolerance) return result;

    while (result.trace.accepted_count < config.max_iterations) {
        double mu = p.dot(r);
        if (mu <= 0.0) {
            // Numerical drift produced a non-descent direction; restart from
            // steepest descent (|r| > 0 here, so mu becomes positive).
            p = r;
            mu = p.dot(r);
            success = true;
        }
        const double p_sq = p.squaredNorm();

        bool step_finite = true;
        if (success) {
            const double sigma = config.sigma0 / std::sqrt(p_sq);
            objective(w + sigma * p, probe_grad);
            if (finite(probe_grad)) {
                delta = p.dot((probe_grad - grad) / sigma);
            } else {
                step_finite = false;
            }
        }

        double alpha = 0.0;
        double comparison = std::numeric_limits<double>::quiet_NaN();
        double trial_cost = std::numeric_limits<double>::quiet_NaN();
        if (step_finite) {
            delta += (lambda - lambda_bar) * p_sq;
            if (delta <= 0.0) {  // make the Hessian estimate positive definite
                lambda_bar = 2.0 * (lambda - delta / p_sq);
                delta = -delta + lambda * p_sq;
                lambda = lambda_bar;
            }
            alpha = mu / delta;
            trial_cost = objective(w + alpha * p, trial_grad);
            if (finite(trial_cost) && finite(trial_grad)) {
                comparison = 2.0 * delta * (cost - trial_cost) / (mu * mu);
            } else {
                step_finite = false;
            }
        }

        const bool accepted = step_finite && finite(comparison) && comparison >= 0.0;
        if (accepted) {
            w += alpha * p;
            cost = trial_cost;
            grad = trial_grad;
            const Eigen::VectorXd r_old = r;
            r = -grad;
            lambda_bar = 0.0;
            success = true;
            consecutive_failures = 0;
            result.trace.accepted_count += 1;
            if (result.trace.accepted_count % static_cast<int>(n) == 0) {
                p = r;
            } else {
                const double beta = (r.squaredNorm() - r.dot(r_old)) / mu;
                p = r + beta * p;
            }
            if (comparison >= 0.75) lambda = 0.25 * lambda;
            if (cost < result.cost) {
                result.cost = cost;
                result.theta = w;
            }
        } else {
            lambda_bar = lambda;
            success = false;
            consecutive_failures += 1;
            if (!step_finite) lambda = std::min(4.0 * lambda, kLambdaCeiling);
        }
        if (step_finite && comparison < 0.25) {
            lambda = std::min(lambda + delta * (1.0 - comparison) / p_sq, kLambdaCeiling);
        }

        result.trace.steps.push_back({cost, r.norm(), accepted});

        if (r.norm() < config.tolerance) break;
        if (consecutive_failures >= kMaxConsecutiveFailures) {
            result.trace.aborted = true;
            break;
        }
    }
    return result;
}

}  // namespace sce
