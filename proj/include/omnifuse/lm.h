#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace omnifuse {

struct LMOptions {
    double initial_lambda = 1e-3;
    double lambda_up = 10.0;   // damping multiplier after a rejected step
    double lambda_down = 10.0; // damping divisor after an accepted step
    double gtol = 1e-10;       // max-norm of J^T r
    double xtol = 1e-12;       // step norm, relative to |x| + xtol
    int max_iters = 200;
};

// Fills the residual vector and, when `jacobian` is non-null, its Jacobian.
using ResidualFunction =
    std::function<void(const Eigen::VectorXd &params, Eigen::VectorXd &residuals, Eigen::MatrixXd *jacobian)>;

struct LMResult {
    Eigen::VectorXd params;
    double cost = 0.0; // 0.5 * |r|^2 at params
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;
    // Cost after the initial evaluation and after every accepted step.
    std::vector<double> cost_history;
};

// Damped Gauss-Newton with Marquardt diagonal scaling. Always returns the
// best parameters seen; `converged` is false when max_iters ran out.
LMResult levenberg_marquardt(const ResidualFunction &fn, Eigen::VectorXd x0, const LMOptions &opts = {});

} // namespace omnifuse
