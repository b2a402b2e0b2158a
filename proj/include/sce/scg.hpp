#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace sce {

struct ScgConfig {
    int max_iterations = 100;   // counts accepted steps
    double sigma0 = 1e-4;       // finite-difference scale for the curvature probe
    double lambda_init = 1e-6;  // initial scaling parameter
    double tolerance = 1e-8;    // stop when the gradient norm drops below this

    void validate() const;
};

struct ScgStep {
    double cost = 0.0;
    double grad_norm = 0.0;
    bool accepted = false;
};

struct ScgTrace {
    std::vector<ScgStep> steps;  // one entry per attempted step
    int accepted_count = 0;
    bool aborted = false;  // non-finite values forced an early stop
};

/// Objective callback: fill grad, return cost.
using ScgObjective = std::function<double(const Eigen::VectorXd& theta, Eigen::VectorXd& grad)>;

struct ScgResult {
    Eigen::VectorXd theta;  // best-cost iterate encountered
    double cost = 0.0;
    ScgTrace trace;
};

/// Moller's scaled conjugate gradient. Second-order information comes from
/// one extra gradient evaluation at theta + sigma*p with sigma = sigma0/|p|;
/// the scaling parameter is raised when the comparison parameter falls below
/// 0.25 and quartered above 0.75; the direction restarts to steepest descent
/// every P-th accepted iteration (P = parameter count). Non-finite trial
/// values count as failed steps and inflate the scaling; 20 consecutive
/// failures abort with the best iterate so far.
ScgResult minimize(const ScgObjective& objective, const Eigen::VectorXd& theta0,
                   const ScgConfig& config);

}  // namespace sce
