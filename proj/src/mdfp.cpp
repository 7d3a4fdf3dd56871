#include "ipmo/mdfp.hpp"

#include <cmath>
#include <sstream>

#include "ipmo/solver.hpp"

namespace ipmo {

void NeumannConfig::validate() const {
    if (max_order < 0) throw std::invalid_argument("max_order must be >= 0");
    if (!(term_tol > 0.0)) throw std::invalid_argument("term_tol must be > 0");
}

namespace detail {

void require_fixed_point(const AllocationPath& zstar,
                         const ProblemParams& params,
                         const ForecastPath& forecast,
                         const CovariancePath& cov, double step_size,
                         double fp_tol) {
    // Accept either an exact fixed point of the raw map (oracle solutions
    // with true zeros) or of the floored map (solver output).
    const AllocationPath raw = md_step(zstar, params, forecast, cov, step_size);
    const double raw_res = (raw.stages - zstar.stages).cwiseAbs().maxCoeff();
    if (raw_res <= 10.0 * fp_tol) return;
    const double floored_res = fixed_point_residual(zstar, params, forecast,
                                                    cov, step_size, 1e-8);
    if (floored_res <= 10.0 * fp_tol) return;
    std::ostringstream msg;
    msg << "derivatives requested at a non-fixed point (residual "
        << std::min(raw_res, floored_res) << " > " << 10.0 * fp_tol << ")";
    throw PreconditionError(msg.str());
}

// Directional derivative of the stage gradients: rows of
// dg_s = Q_s v_s - lambda c_s .* v_{s-1} - lambda c_{s+1} .* v_{s+1},
// where c_s = smooth_abs_curv(z_s - z_{s-1}) and Q_s is the stage Hessian.
// BlockDiagonal mode keeps only the Q_s v_s term.
Matrix grad_directional(const MirrorMapEval& eval, const AllocationPath& path,
                        const ProblemParams& params, const CovariancePath& cov,
                        const Matrix& v, JacobianMode mode) {
    const int h = path.horizon();
    const int n = path.n_assets();
    const double lam = params.turnover_weight;
    Matrix dg(h, n);
    for (int s = 0; s < h; ++s) {
        dg.row(s) =
            params.risk_aversion * (cov.at(s) * v.row(s).transpose()).transpose();
        if (lam > 0.0) {
            Eigen::RowVectorXd own = eval.trade_curv.row(s);
            if (s + 1 < h) own += eval.trade_curv.row(s + 1);
            dg.row(s) += lam * own.cwiseProduct(v.row(s));
            if (mode == JacobianMode::kExact) {
                if (s > 0)
                    dg.row(s) -=
                        lam * eval.trade_curv.row(s).cwiseProduct(v.row(s - 1));
                if (s + 1 < h)
                    dg.row(s) -= lam *
                                 eval.trade_curv.row(s + 1).cwiseProduct(v.row(s + 1));
            }
        }
    }
    return dg;
}

Matrix jvp_z(const MirrorMapEval& eval, const AllocationPath& path,
             const ProblemParams& params, const CovariancePath& cov,
             const Matrix& v, JacobianMode mode) {
    const int h = path.horizon();
    const Matrix dg = grad_directional(eval, path, params, cov, v, mode);
    Matrix out(h, path.n_assets());
    for (int s = 0; s < h; ++s) {
        // dr = exp_factors .* v - step * r .* dg, then project and normalize.
        const Eigen::RowVectorXd dr =
            eval.exp_factors.row(s).cwiseProduct(v.row(s)) -
            eval.step_size * eval.exp_weights.row(s).cwiseProduct(dg.row(s));
        out.row(s) =
            (dr - eval.next.row(s) * dr.sum()) / eval.normalizers(s);
    }
    return out;
}

Matrix vjp_z(const MirrorMapEval& eval, const AllocationPath& path,
             const ProblemParams& params, const CovariancePath& cov,
             const Matrix& u, JacobianMode mode) {
    const int h = path.horizon();
    const int n = path.n_assets();
    const double lam = params.turnover_weight;
    Matrix out = Matrix::Zero(h, n);
    Matrix q(h, n);  // cotangent of the stage gradients
    for (int s = 0; s < h; ++s) {
        const double mixed = eval.next.row(s).dot(u.row(s));
        const Eigen::RowVectorXd p =
            (u.row(s) - Eigen::RowVectorXd::Constant(n, mixed)) /
            eval.normalizers(s);
        out.row(s) = eval.exp_factors.row(s).cwiseProduct(p);
        q.row(s) = -eval.step_size * eval.exp_weights.row(s).cwiseProduct(p);
    }
    for (int s = 0; s < h; ++s) {
        out.row(s) += params.risk_aversion *
                      (cov.at(s) * q.row(s).transpose()).transpose();
        if (lam > 0.0) {
            Eigen::RowVectorXd own = eval.trade_curv.row(s);
            if (s + 1 < h) own += eval.trade_curv.row(s + 1);
            out.row(s) += lam * own.cwiseProduct(q.row(s));
            if (mode == JacobianMode::kExact) {
                if (s > 0)
                    out.row(s - 1) -=
                        lam * eval.trade_curv.row(s).cwiseProduct(q.row(s));
                if (s + 1 < h)
                    out.row(s + 1) -= lam *
                                      eval.trade_curv.row(s + 1).cwiseProduct(q.row(s));
            }
        }
    }
    return out;
}

Matrix vjp_forecast(const MirrorMapEval& eval, const Matrix& u) {
    const int h = static_cast<int>(u.rows());
    const int n = static_cast<int>(u.cols());
    Matrix out(h, n);
    for (int s = 0; s < h; ++s) {
        const double mixed = eval.next.row(s).dot(u.row(s));
        out.row(s) = eval.step_size *
                     eval.next.row(s).cwiseProduct(
                         u.row(s) - Eigen::RowVectorXd::Constant(n, mixed));
    }
    return out;
}

}  // namespace detail

namespace {

void check_direction(const AllocationPath& zstar, const Matrix& v) {
    if (v.rows() != zstar.horizon() || v.cols() != zstar.n_assets())
        throw ShapeError("direction does not match the path dimensions");
}

}  // namespace

Matrix phi_jvp_z(const AllocationPath& zstar, const Matrix& v,
                 const ProblemParams& params, const ForecastPath& forecast,
                 const CovariancePath& cov, double step_size,
                 JacobianMode mode, double fp_tol) {
    check_direction(zstar, v);
    detail::require_fixed_point(zstar, params, forecast, cov, step_size, fp_tol);
    const MirrorMapEval eval =
        evaluate_mirror_map(zstar, params, forecast, cov, step_size);
    return detail::jvp_z(eval, zstar, params, cov, v, mode);
}

Matrix phi_vjp_z(const AllocationPath& zstar, const Matrix& u,
                 const ProblemParams& params, const ForecastPath& forecast,
                 const CovariancePath& cov, double step_size,
                 JacobianMode mode, double fp_tol) {
    check_direction(zstar, u);
    detail::require_fixed_point(zstar, params, forecast, cov, step_size, fp_tol);
    const MirrorMapEval eval =
        evaluate_mirror_map(zstar, params, forecast, cov, step_size);
    return detail::vjp_z(eval, zstar, params, cov, u, mode);
}

Matrix phi_vjp_forecast(const AllocationPath& zstar, const Matrix& u,
                        const ProblemParams& params,
                        const ForecastPath& forecast,
                        const CovariancePath& cov, double step_size,
                        double fp_tol) {
    check_direction(zstar, u);
    detail::require_fixed_point(zstar, params, forecast, cov, step_size, fp_tol);
    const MirrorMapEval eval =
        evaluate_mirror_map(zstar, params, forecast, cov, step_size);
    return detail::vjp_forecast(eval, u);
}

ImplicitVjpResult implicit_vjp(const AllocationPath& zstar,
                               const Matrix& loss_grad,
                               const ProblemParams& params,
                               const ForecastPath& forecast,
                               const CovariancePath& cov, double step_size,
                               const NeumannConfig& ncfg, JacobianMode mode,
                               double fp_tol) {
    check_direction(zstar, loss_grad);
    ncfg.validate();
    detail::require_fixed_point(zstar, params, forecast, cov, step_size, fp_tol);
    const MirrorMapEval eval =
        evaluate_mirror_map(zstar, params, forecast, cov, step_size);

    ImplicitVjpResult result;
    Matrix accumulated = Matrix::Zero(loss_grad.rows(), loss_grad.cols());
    Matrix term = loss_grad;
    const double initial_norm = term.cwiseAbs().maxCoeff();
    double term_norm = initial_norm;
    for (int b = 0; b <= ncfg.max_order; ++b) {
        accumulated += term;
        ++result.terms;
        term = detail::vjp_z(eval, zstar, params, cov, term, mode);
        term_norm = term.cwiseAbs().maxCoeff();
        if (!std::isfinite(term_norm) || term_norm > 1e6 * initial_norm + 1e6) {
            std::ostringstream msg;
            msg << "Neumann series diverged after " << result.terms
                << " terms; reduce the step size";
            throw DivergenceError(msg.str());
        }
        if (term_norm <= ncfg.term_tol) {
            result.converged = true;
            break;
        }
    }
    result.residual = term_norm;  // exact residual of (I - J') w = loss_grad
    if (!result.converged && term_norm >= initial_norm && initial_norm > 0.0) {
        std::ostringstream msg;
        msg << "Neumann series not decaying after " << result.terms
            << " terms (last " << term_norm << " vs first " << initial_norm
            << "); reduce the step size";
        throw DivergenceError(msg.str());
    }
    result.grad_forecast = detail::vjp_forecast(eval, accumulated);
    return result;
}

double spectral_radius_estimate(const AllocationPath& zstar,
                                const ProblemParams& params,
                                const ForecastPath& forecast,
                                const CovariancePath& cov, double step_size,
                                JacobianMode mode, double fp_tol) {
    detail::require_fixed_point(zstar, params, forecast, cov, step_size, fp_tol);
    const MirrorMapEval eval =
        evaluate_mirror_map(zstar, params, forecast, cov, step_size);
    const int h = zstar.horizon();
    const int n = zstar.n_assets();

    // Deterministic start vector in the per-stage zero-sum tangent space.
    Matrix v(h, n);
    for (int s = 0; s < h; ++s) {
        for (int i = 0; i < n; ++i)
            v(s, i) = std::sin(1.7 * (i + 1) + 0.3 * (s + 1));
        v.row(s).array() -= v.row(s).mean();
    }
    v /= v.norm();

    double estimate = 0.0;
    for (int k = 0; k < 200; ++k) {
        const Matrix jv = detail::jvp_z(eval, zstar, params, cov, v, mode);
        const double rayleigh = (v.array() * jv.array()).sum();
        const double norm = jv.norm();
        if (norm == 0.0) return 0.0;
        const double next = std::abs(rayleigh);
        const bool settled = k > 0 && std::abs(next - estimate) < 1e-10;
        estimate = next;
        if (settled) break;
        v = jv / norm;
    }
    return estimate;
}

Matrix implicit_jacobian(const AllocationPath& zstar,
                         const ProblemParams& params,
                         const ForecastPath& forecast,
                         const CovariancePath& cov, double step_size,
                         const NeumannConfig& ncfg, JacobianMode mode) {
    const int h = zstar.horizon();
    const int n = zstar.n_assets();
    Matrix jac(h * n, h * n);
    Matrix seed = Matrix::Zero(h, n);
    for (int s = 0; s < h; ++s) {
        for (int i = 0; i < n; ++i) {
            seed(s, i) = 1.0;
            const ImplicitVjpResult row = implicit_vjp(
                zstar, seed, params, forecast, cov, step_size, ncfg, mode);
            seed(s, i) = 0.0;
            jac.row(s * n + i) =
                Eigen::Map<const Eigen::RowVectorXd>(row.grad_forecast.data(),
                                                     h * n);
        }
    }
    return jac;
}

}  // namespace ipmo
