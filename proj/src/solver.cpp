#include "ipmo/solver.hpp"

#include <cmath>

namespace ipmo {

void SolverConfig::validate(int n_assets) const {
    if (step_size < 0.0)
        throw std::invalid_argument("step_size must be >= 0 (0 = auto)");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    if (!(floor > 0.0) || !(floor < 1.0 / n_assets))
        throw std::invalid_argument("floor must lie in (0, 1/N)");
}

MirrorMapEval evaluate_mirror_map(const AllocationPath& path,
                                  const ProblemParams& params,
                                  const ForecastPath& forecast,
                                  const CovariancePath& cov,
                                  double step_size) {
    if (!(step_size > 0.0))
        throw std::invalid_argument("step_size must be > 0");
    MirrorMapEval eval;
    eval.step_size = step_size;
    eval.stage_grads = inner_objective(path, params, forecast, cov).stage_grads;
    eval.scaled_grads = -step_size * eval.stage_grads;
    eval.trade_curv = trade_curvature(path, params);

    const int h = path.horizon();
    const int n = path.n_assets();
    eval.exp_factors.resize(h, n);
    eval.exp_weights.resize(h, n);
    eval.normalizers.resize(h);
    eval.next.resize(h, n);
    for (int s = 0; s < h; ++s) {
        const double shift = eval.scaled_grads.row(s).maxCoeff();
        for (int i = 0; i < n; ++i) {
            eval.exp_factors(s, i) = std::exp(eval.scaled_grads(s, i) - shift);
            eval.exp_weights(s, i) = path.stages(s, i) * eval.exp_factors(s, i);
        }
        const double m = eval.exp_weights.row(s).sum();
        if (!(m > 0.0) || !std::isfinite(m))
            throw NumericError("mirror map normalizer is not positive");
        eval.normalizers(s) = m;
        eval.next.row(s) = eval.exp_weights.row(s) / m;
    }
    return eval;
}

AllocationPath md_step(const AllocationPath& path, const ProblemParams& params,
                       const ForecastPath& forecast, const CovariancePath& cov,
                       double step_size) {
    MirrorMapEval eval =
        evaluate_mirror_map(path, params, forecast, cov, step_size);
    return AllocationPath(path.pre_trade, std::move(eval.next));
}

double step_size_bound(const AllocationPath& path, const ProblemParams& params,
                       const CovariancePath& cov) {
    double bound = std::numeric_limits<double>::infinity();
    for (int s = 0; s < path.horizon(); ++s) {
        const Eigen::MatrixXd q = stage_hessian(path, s, params, cov);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
            q, Eigen::EigenvaluesOnly);
        const double top = eig.eigenvalues().maxCoeff();
        const double zmax = path.stages.row(s).maxCoeff();
        bound = std::min(bound, 2.0 / (top * zmax));
    }
    return bound;
}

double fixed_point_residual(const AllocationPath& path,
                            const ProblemParams& params,
                            const ForecastPath& forecast,
                            const CovariancePath& cov, double step_size,
                            double floor) {
    AllocationPath next = md_step(path, params, forecast, cov, step_size);
    for (int s = 0; s < next.horizon(); ++s)
        clamp_floor_row(next.stages.row(s), floor);
    return (next.stages - path.stages).cwiseAbs().maxCoeff();
}

namespace {

SolveResult iterate(const AllocationPath& init, const ProblemParams& params,
                    const ForecastPath& forecast, const CovariancePath& cov,
                    const SolverConfig& config, double step_size) {
    SolveResult result;
    result.step_size = step_size;
    AllocationPath z = clamp_floor(init, config.floor);
    for (int k = 0; k < config.max_iters; ++k) {
        AllocationPath next = md_step(z, params, forecast, cov, step_size);
        for (int s = 0; s < next.horizon(); ++s)
            clamp_floor_row(next.stages.row(s), config.floor);
        result.residual = (next.stages - z.stages).cwiseAbs().maxCoeff();
        result.iters = k + 1;
        if (result.residual <= config.tol) {
            result.converged = true;
            result.path = std::move(z);  // the point the residual refers to
            return result;
        }
        z = std::move(next);
    }
    result.path = std::move(z);
    return result;
}

}  // namespace

SolveResult solve_fixed_point(const AllocationPath& init,
                              const ProblemParams& params,
                              const ForecastPath& forecast,
                              const CovariancePath& cov,
                              const SolverConfig& config) {
    params.validate();
    config.validate(params.n_assets);
    if (init.horizon() != params.horizon || init.n_assets() != params.n_assets)
        throw ShapeError("initial path does not match problem dimensions");

    double eta = config.step_size > 0.0
                     ? config.step_size
                     : 0.5 * step_size_bound(init, params, cov);
    SolveResult result;
    // The contraction bound depends on the unknown solution, so the step
    // chosen at the start point is re-validated there and the solve retried
    // with a smaller step when it fails.
    for (int attempt = 0; attempt < 4; ++attempt) {
        result = iterate(init, params, forecast, cov, config, eta);
        const double bound = step_size_bound(result.path, params, cov);
        if (result.converged && eta < bound) return result;
        eta = std::min(0.5 * bound, 0.5 * eta);
    }
    return result;
}

}  // namespace ipmo
