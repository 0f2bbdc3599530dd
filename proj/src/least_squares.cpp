#include "magspring/least_squares.hpp"

#include "magspring/error.hpp"

#include <algorithm>
#include <cmath>

namespace magspring {

namespace {

void central_jacobian(const LeastSquaresProblem& pb, const Eigen::VectorXd& x, Eigen::MatrixXd& jac) {
    const Eigen::Index n = x.size();
    jac.resize(pb.residual_count, n);
    Eigen::VectorXd rp(pb.residual_count), rm(pb.residual_count);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double typical = pb.scale.size() == n ? pb.scale[j] : 1.0;
        const double h = 1e-6 * std::max(std::abs(x[j]), std::abs(typical));
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        if (pb.project) {
            pb.project(xp);
            pb.project(xm);
        }
        const double span = xp[j] - xm[j];
        if (span == 0.0) {
            jac.col(j).setZero();
            continue;
        }
        pb.residual(xp, rp);
        pb.residual(xm, rm);
        jac.col(j) = (rp - rm) / span;
    }
}

} // namespace

LevenbergMarquardtResult levenberg_marquardt(const LeastSquaresProblem& pb, Eigen::VectorXd x,
                                             const LevenbergMarquardtOptions& opt) {
    require(pb.residual_count > 0 && static_cast<bool>(pb.residual), ErrorCode::domain,
            "least-squares problem needs residuals");
    if (pb.project) pb.project(x);

    Eigen::VectorXd r(pb.residual_count), r_trial(pb.residual_count);
    pb.residual(x, r);
    double sse = r.squaredNorm();
    require(std::isfinite(sse), ErrorCode::domain, "residuals are not finite at the start point");

    LevenbergMarquardtResult out;
    double lambda = opt.initial_lambda;
    Eigen::MatrixXd jac;
    const Eigen::Index n = x.size();
    for (int it = 0; it < opt.max_iterations; ++it) {
        out.iterations = it + 1;
        if (sse == 0.0) {
            out.converged = true;
            break;
        }
        if (pb.jacobian) {
            jac.resize(pb.residual_count, n);
            pb.jacobian(x, jac);
        } else {
            central_jacobian(pb, x, jac);
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * r;
        Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-30 * std::max(1.0, jtj.diagonal().maxCoeff()));

        bool accepted = false;
        while (lambda <= opt.max_lambda) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * diag;
            const Eigen::VectorXd step = a.ldlt().solve(-g);
            Eigen::VectorXd trial = x + step;
            if (pb.project) pb.project(trial);
            if (trial == x) {
                lambda *= 10.0;
                continue;
            }
            pb.residual(trial, r_trial);
            const double sse_trial = r_trial.squaredNorm();
            if (std::isfinite(sse_trial) && sse_trial < sse) {
                const double gain = (sse - sse_trial) / sse;
                x = trial;
                r.swap(r_trial);
                sse = sse_trial;
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                if (gain < opt.sse_rel_tol) out.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        // No descent along any damped step: a local minimum to working precision.
        if (!accepted) out.converged = true;
        if (out.converged) break;
    }
    out.x = x;
    out.sse = sse;
    return out;
}

} // namespace magspring
