#include "ipmo/objective.hpp"

#include <cmath>

namespace ipmo {

namespace {

void check_dims(const AllocationPath& path, const ProblemParams& params,
                const ForecastPath* forecast, const CovariancePath& cov) {
    const int h = path.horizon();
    const int n = path.n_assets();
    if (h != params.horizon || n != params.n_assets)
        throw ShapeError("allocation path does not match problem dimensions");
    if (path.pre_trade.size() != n)
        throw ShapeError("pre-trade weights have wrong length");
    if (forecast && (forecast->horizon() != h || forecast->n_assets() != n))
        throw ShapeError("forecast path does not match problem dimensions");
    if (cov.horizon() != h || cov.n_assets() != n)
        throw ShapeError("covariance path does not match problem dimensions");
}

}  // namespace

double smooth_abs(double x, double smoothing) {
    if (!(smoothing > 0.0))
        throw std::invalid_argument("smoothing must be > 0");
    return std::sqrt(x * x + smoothing);
}

double smooth_abs_grad(double x, double smoothing) {
    if (!(smoothing > 0.0))
        throw std::invalid_argument("smoothing must be > 0");
    return x / std::sqrt(x * x + smoothing);
}

double smooth_abs_curv(double x, double smoothing) {
    if (!(smoothing > 0.0))
        throw std::invalid_argument("smoothing must be > 0");
    const double t = x * x + smoothing;
    return smoothing / (t * std::sqrt(t));
}

ObjectiveEval inner_objective(const AllocationPath& path,
                              const ProblemParams& params,
                              const ForecastPath& forecast,
                              const CovariancePath& cov) {
    params.validate();
    check_dims(path, params, &forecast, cov);
    const int h = params.horizon;
    const int n = params.n_assets;
    const double lam = params.turnover_weight;
    const double kap = params.smoothing;

    ObjectiveEval eval;
    eval.stage_grads.setZero(h, n);

    // Trades d_s = z_s - z_{s-1} and the penalty gradient rows.
    Matrix trades(h, n);
    Matrix trade_grads;
    if (lam > 0.0) trade_grads.resize(h, n);
    for (int s = 0; s < h; ++s) {
        const auto prev =
            (s == 0) ? path.pre_trade.transpose() : path.stages.row(s - 1);
        trades.row(s) = path.stages.row(s) - prev;
        if (lam > 0.0) {
            for (int i = 0; i < n; ++i) {
                const double d = trades(s, i);
                eval.value += lam * smooth_abs(d, kap);
                trade_grads(s, i) = smooth_abs_grad(d, kap);
            }
        }
    }

    for (int s = 0; s < h; ++s) {
        const Eigen::VectorXd z = path.stages.row(s).transpose();
        const Eigen::VectorXd vz = cov.at(s) * z;
        eval.value += 0.5 * params.risk_aversion * z.dot(vz) -
                      forecast.returns.row(s).dot(path.stages.row(s));
        eval.stage_grads.row(s) =
            params.risk_aversion * vz.transpose() - forecast.returns.row(s);
        if (lam > 0.0) {
            eval.stage_grads.row(s) += lam * trade_grads.row(s);
            if (s + 1 < h) eval.stage_grads.row(s) -= lam * trade_grads.row(s + 1);
        }
    }

    if (!std::isfinite(eval.value) || !eval.stage_grads.allFinite())
        throw NumericError("inner objective produced non-finite values");
    return eval;
}

Matrix trade_curvature(const AllocationPath& path, const ProblemParams& params) {
    const int h = path.horizon();
    const int n = path.n_assets();
    Matrix curv(h, n);
    for (int s = 0; s < h; ++s) {
        const auto prev =
            (s == 0) ? path.pre_trade.transpose() : path.stages.row(s - 1);
        for (int i = 0; i < n; ++i)
            curv(s, i) =
                smooth_abs_curv(path.stages(s, i) - prev(i), params.smoothing);
    }
    return curv;
}

Eigen::MatrixXd stage_hessian(const AllocationPath& path, int stage,
                              const ProblemParams& params,
                              const CovariancePath& cov) {
    check_dims(path, params, nullptr, cov);
    if (stage < 0 || stage >= params.horizon)
        throw std::out_of_range("stage index out of range");
    Eigen::MatrixXd q = params.risk_aversion * cov.at(stage);
    const double lam = params.turnover_weight;
    if (lam > 0.0) {
        const auto prev = (stage == 0) ? path.pre_trade.transpose()
                                       : path.stages.row(stage - 1);
        for (int i = 0; i < params.n_assets; ++i) {
            double c = smooth_abs_curv(path.stages(stage, i) - prev(i),
                                       params.smoothing);
            if (stage + 1 < params.horizon)
                c += smooth_abs_curv(
                    path.stages(stage + 1, i) - path.stages(stage, i),
                    params.smoothing);
            q(i, i) += lam * c;
        }
    }
    return q;
}

DecisionLossEval decision_loss(const AllocationPath& path,
                               const Matrix& realized,
                               const CovariancePath& cov,
                               const ProblemParams& params) {
    const int h = path.horizon();
    const int n = path.n_assets();
    if (realized.rows() != h || realized.cols() != n)
        throw ShapeError("realized returns do not match the path dimensions");
    if (cov.horizon() != h || cov.n_assets() != n)
        throw ShapeError("covariance path does not match the path dimensions");

    DecisionLossEval eval;
    eval.grad.setZero(h, n);
    const double inv_h = 1.0 / h;
    for (int s = 0; s < h; ++s) {
        const Eigen::VectorXd z = path.stages.row(s).transpose();
        const Eigen::VectorXd vz = cov.at(s) * z;
        eval.value += inv_h * (-realized.row(s).dot(path.stages.row(s)) +
                               0.5 * params.risk_aversion * z.dot(vz));
        eval.grad.row(s) =
            inv_h * (params.risk_aversion * vz.transpose() - realized.row(s));
    }
    return eval;
}

}  // namespace ipmo
