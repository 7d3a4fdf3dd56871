#pragma once

#include "ipmo/mirror_map.hpp"
#include "ipmo/types.hpp"

namespace ipmo {

/// How much of the update map's Jacobian the derivative products use.
/// Exact keeps the tri-diagonal stage coupling created by the trade penalty;
/// BlockDiagonal drops the cross-stage blocks (stagewise approximation,
/// kept for ablation). The two coincide when turnover_weight = 0.
enum class JacobianMode { kExact, kBlockDiagonal };

struct NeumannConfig {
    int max_order = 200;     ///< hard cap on series terms
    double term_tol = 1e-6;  ///< stop once the next term falls below this

    void validate() const;
};

struct ImplicitVjpResult {
    Matrix grad_forecast;   ///< H x N gradient w.r.t. the predicted returns
    double residual = 0.0;  ///< sup-norm of the first omitted series term
    int terms = 0;
    bool converged = false;
};

/// Directional derivative of the update map in the allocation argument:
/// (d Phi / d z) v, assembled stage by stage without forming the
/// (NH) x (NH) matrix. The base point must be a converged fixed point
/// (checked; fp_tol is the solver tolerance the point was produced with).
Matrix phi_jvp_z(const AllocationPath& zstar, const Matrix& v,
                 const ProblemParams& params, const ForecastPath& forecast,
                 const CovariancePath& cov, double step_size,
                 JacobianMode mode = JacobianMode::kExact,
                 double fp_tol = 1e-10);

/// Transpose product (d Phi / d z)' u, the building block of the adjoint
/// Neumann accumulation.
Matrix phi_vjp_z(const AllocationPath& zstar, const Matrix& u,
                 const ProblemParams& params, const ForecastPath& forecast,
                 const CovariancePath& cov, double step_size,
                 JacobianMode mode = JacobianMode::kExact,
                 double fp_tol = 1e-10);

/// Transpose product of the map's forecast derivative: stage s of the result
/// is step_size * z_s .* (u_s - <z_s, u_s> 1). Forecasts enter the stage
/// gradient as -yhat_s, so this is the only parameter block.
Matrix phi_vjp_forecast(const AllocationPath& zstar, const Matrix& u,
                        const ProblemParams& params,
                        const ForecastPath& forecast,
                        const CovariancePath& cov, double step_size,
                        double fp_tol = 1e-10);

/// Gradient of a scalar loss w.r.t. the predicted returns through the fixed
/// point: accumulates w = sum_b ((dPhi/dz)')^b loss_grad until the next term
/// drops below term_tol (or the cap), then pushes w through the forecast
/// block. Throws DivergenceError when the series grows instead of decaying,
/// which signals a step size above the contraction bound.
ImplicitVjpResult implicit_vjp(const AllocationPath& zstar,
                               const Matrix& loss_grad,
                               const ProblemParams& params,
                               const ForecastPath& forecast,
                               const CovariancePath& cov, double step_size,
                               const NeumannConfig& ncfg,
                               JacobianMode mode = JacobianMode::kExact,
                               double fp_tol = 1e-10);

/// Power-iteration estimate of the spectral radius of dPhi/dz at the fixed
/// point (200 iterations or Rayleigh-quotient change below 1e-10).
double spectral_radius_estimate(const AllocationPath& zstar,
                                const ProblemParams& params,
                                const ForecastPath& forecast,
                                const CovariancePath& cov, double step_size,
                                JacobianMode mode = JacobianMode::kExact,
                                double fp_tol = 1e-10);

/// Full solution Jacobian d z* / d yhat assembled row by row from
/// implicit_vjp, flat index = stage * N + asset. Test and diagnostic
/// support; O((NH)^2) memory by construction.
Matrix implicit_jacobian(const AllocationPath& zstar,
                         const ProblemParams& params,
                         const ForecastPath& forecast,
                         const CovariancePath& cov, double step_size,
                         const NeumannConfig& ncfg,
                         JacobianMode mode = JacobianMode::kExact);

namespace detail {

/// Low-level products on a prebuilt map evaluation (no fixed-point check).
Matrix jvp_z(const MirrorMapEval& eval, const AllocationPath& path,
             const ProblemParams& params, const CovariancePath& cov,
             const Matrix& v, JacobianMode mode);
Matrix vjp_z(const MirrorMapEval& eval, const AllocationPath& path,
             const ProblemParams& params, const CovariancePath& cov,
             const Matrix& u, JacobianMode mode);
Matrix vjp_forecast(const MirrorMapEval& eval, const Matrix& u);

/// Fixed-point guard shared by the public entry points.
void require_fixed_point(const AllocationPath& zstar,
                         const ProblemParams& params,
                         const ForecastPath& forecast,
                         const CovariancePath& cov, double step_size,
                         double fp_tol);

}  // namespace detail

}  // namespace ipmo
