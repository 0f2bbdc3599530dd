#pragma once

// Levenberg-Marquardt minimization of a sum of squared residuals, with
// Marquardt's diagonal scaling and an optional projection that keeps the
// iterate inside a feasible box.

#include <Eigen/Dense>

#include <functional>

namespace magspring {

struct LeastSquaresProblem {
    Eigen::Index residual_count = 0;
    /// r(x); `r` arrives sized to residual_count.
    std::function<void(const Eigen::VectorXd& x, Eigen::VectorXd& r)> residual;
    /// Optional analytic Jacobian dr/dx; central differences when empty.
    std::function<void(const Eigen::VectorXd& x, Eigen::MatrixXd& jac)> jacobian;
    /// Optional map onto the feasible set, applied to every trial point.
    std::function<void(Eigen::VectorXd& x)> project;
    /// Typical parameter magnitudes, used for finite-difference steps.
    Eigen::VectorXd scale;
};

struct LevenbergMarquardtOptions {
    int max_iterations = 200;
    double sse_rel_tol = 1e-12; // stop on smaller relative SSE decrease
    double initial_lambda = 1e-3;
    double max_lambda = 1e16;
};

struct LevenbergMarquardtResult {
    Eigen::VectorXd x;
    double sse = 0.0;
    int iterations = 0;
    bool converged = false; // false only when the iteration cap was hit
};

LevenbergMarquardtResult levenberg_marquardt(const LeastSquaresProblem& problem, Eigen::VectorXd x0,
                                             const LevenbergMarquardtOptions& options = {});

} // namespace magspring
