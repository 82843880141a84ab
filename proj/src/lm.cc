#include "omnifuse/lm.h"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

namespace omnifuse {

LMResult levenberg_marquardt(const ResidualFunction &fn, Eigen::VectorXd x0, const LMOptions &opts) {
    LMResult res;
    res.params = std::move(x0);

    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    fn(res.params, r, &J);
    res.cost = 0.5 * r.squaredNorm();
    res.cost_history.push_back(res.cost);

    double lambda = opts.initial_lambda;
    Eigen::VectorXd r_trial;

    for (res.iterations = 0; res.iterations < opts.max_iters; ++res.iterations) {
        const Eigen::VectorXd g = J.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() < opts.gtol) {
            res.converged = true;
            res.stop_reason = "gradient";
            return res;
        }

        const Eigen::MatrixXd JtJ = J.transpose() * J;
        Eigen::MatrixXd A = JtJ;
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            A(i, i) += lambda * std::max(JtJ(i, i), 1e-12);
        const Eigen::VectorXd step = A.ldlt().solve(-g);

        if (step.norm() < opts.xtol * (res.params.norm() + opts.xtol)) {
            res.converged = true;
            res.stop_reason = "step";
            return res;
        }

        const Eigen::VectorXd trial = res.params + step;
        fn(trial, r_trial, nullptr);
        const double trial_cost = 0.5 * r_trial.squaredNorm();

        if (std::isfinite(trial_cost) && trial_cost < res.cost) {
            res.params = trial;
            res.cost = trial_cost;
            res.cost_history.push_back(trial_cost);
            fn(res.params, r, &J);
            lambda /= opts.lambda_down;
        } else {
            lambda *= opts.lambda_up;
        }
    }
    res.stop_reason = "max_iters";
    return res;
}

} // namespace omnifuse
