#pragma once

#include "ipmo/types.hpp"

namespace ipmo {

/// Value and per-stage gradients of the smoothed inner objective.
struct ObjectiveEval {
    double value = 0.0;
    Matrix stage_grads;  ///< H x N, row s = gradient w.r.t. stage s weights
};

/// Decision loss evaluated against realized returns, with its path gradient.
struct DecisionLossEval {
    double value = 0.0;
    Matrix grad;  ///< H x N
};

/// Smooth surrogate for |x|: sqrt(x^2 + smoothing). Even, bounded below by
/// sqrt(smoothing), and within sqrt(smoothing) of |x| everywhere.
double smooth_abs(double x, double smoothing);

/// Derivative x / sqrt(x^2 + smoothing); odd and valued in (-1, 1).
double smooth_abs_grad(double x, double smoothing);

/// Second derivative smoothing / (x^2 + smoothing)^{3/2}; peaks at
/// smoothing^{-1/2} at the origin.
double smooth_abs_curv(double x, double smoothing);

/// Evaluates the smoothed multi-period mean-variance objective
///
///   sum_s [ (delta/2) z_s' V_s z_s - yhat_s' z_s
///           + lambda * sum_i sqrt((z_s - z_{s-1})_i^2 + kappa) ]
///
/// with z at stage -1 taken as the pre-trade weights, and returns both the
/// value and the per-stage gradients. The gradient of stage s picks up the
/// trade penalty terms against both neighbours; the final stage has no
/// successor term.
ObjectiveEval inner_objective(const AllocationPath& path,
                              const ProblemParams& params,
                              const ForecastPath& forecast,
                              const CovariancePath& cov);

/// Per-coordinate curvature of the trade penalty at each stage boundary:
/// row s = smooth_abs_curv(z_s - z_{s-1}) (s = 0 uses the pre-trade weights).
/// The stage-s Hessian diagonal block adds turnover_weight * (row s + row s+1)
/// and the (s, s-1) cross block is -turnover_weight * diag(row s).
Matrix trade_curvature(const AllocationPath& path, const ProblemParams& params);

/// Dense N x N Hessian block of the inner objective w.r.t. stage s (0-based).
/// Symmetric positive definite whenever the covariance is.
Eigen::MatrixXd stage_hessian(const AllocationPath& path, int stage,
                              const ProblemParams& params,
                              const CovariancePath& cov);

/// Mean-variance evaluation of a planned path against realized returns,
/// averaged over stages:  (1/H) sum_k [ -z_k' y_k + (delta/2) z_k' V_k z_k ].
/// This is the training signal for the integrated method.
DecisionLossEval decision_loss(const AllocationPath& path,
                               const Matrix& realized,
                               const CovariancePath& cov,
                               const ProblemParams& params);

}  // namespace ipmo
