#pragma once

#include "ipmo/mirror_map.hpp"
#include "ipmo/types.hpp"

namespace ipmo {

struct SolverConfig {
    double step_size = 0.0;  ///< multiplicative-update step; 0 selects
                             ///< 0.5 * step_size_bound at the start point
    double tol = 1e-10;      ///< sup-norm fixed-point residual target
    int max_iters = 50000;
    double floor = 1e-8;     ///< coordinate floor applied between iterations

    void validate(int n_assets) const;
};

struct SolveResult {
    AllocationPath path;
    double residual = 0.0;   ///< sup-norm change of the last iteration
    int iters = 0;
    bool converged = false;
    double step_size = 0.0;  ///< step actually used
};

/// One simultaneous multiplicative update of every stage, with gradients
/// taken at the input path. Keeps each row on the simplex and preserves
/// zero coordinates.
AllocationPath md_step(const AllocationPath& path, const ProblemParams& params,
                       const ForecastPath& forecast, const CovariancePath& cov,
                       double step_size);

/// Largest step size guaranteeing that the update map contracts near the
/// solution: min over stages of 2 / (lambda_max(Q_s) * max_i z_{s,i}).
double step_size_bound(const AllocationPath& path, const ProblemParams& params,
                       const CovariancePath& cov);

/// Iterates the floored multiplicative update to its fixed point. The
/// residual is measured on the map actually iterated (update followed by the
/// coordinate floor), so converged results satisfy residual <= tol at the
/// returned path. Non-convergence is reported through the flag, not thrown.
/// If the step size chosen at the start point turns out to violate the
/// contraction bound at the solution, the solve is retried with a smaller
/// step.
SolveResult solve_fixed_point(const AllocationPath& init,
                              const ProblemParams& params,
                              const ForecastPath& forecast,
                              const CovariancePath& cov,
                              const SolverConfig& config);

/// Residual of the floored update map at `path`: the quantity driven below
/// tol by solve_fixed_point.
double fixed_point_residual(const AllocationPath& path,
                            const ProblemParams& params,
                            const ForecastPath& forecast,
                            const CovariancePath& cov, double step_size,
                            double floor);

}  // namespace ipmo
