#include "ipmo/types.hpp"

#include <cmath>
#include <sstream>

namespace ipmo {

void ProblemParams::validate() const {
    if (!(risk_aversion > 0.0))
        throw std::invalid_argument("risk_aversion must be > 0");
    if (!(turnover_weight >= 0.0))
        throw std::invalid_argument("turnover_weight must be >= 0");
    if (!(smoothing > 0.0))
        throw std::invalid_argument("smoothing must be > 0");
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (n_assets < 2) throw std::invalid_argument("n_assets must be >= 2");
    if (!(cov_jitter >= 0.0))
        throw std::invalid_argument("cov_jitter must be >= 0");
}

AllocationPath AllocationPath::replicate(const Vector& pre, int horizon) {
    AllocationPath path;
    path.pre_trade = pre;
    path.stages = pre.transpose().replicate(horizon, 1);
    return path;
}

void ForecastPath::validate() const {
    if (!returns.allFinite())
        throw NumericError("forecast path contains non-finite entries");
}

CovariancePath::CovariancePath(std::vector<Eigen::MatrixXd> per_stage)
    : mats_(std::move(per_stage)),
      horizon_(static_cast<int>(mats_.size())),
      shared_(false) {
    if (mats_.empty()) throw ShapeError("covariance path must have >= 1 stage");
}

CovariancePath CovariancePath::replicated(Eigen::MatrixXd cov, int horizon) {
    if (horizon < 1) throw ShapeError("covariance path must have >= 1 stage");
    CovariancePath path;
    path.mats_.push_back(std::move(cov));
    path.horizon_ = horizon;
    path.shared_ = true;
    return path;
}

void CovariancePath::validate() const {
    for (const auto& v : mats_) {
        if (v.rows() != v.cols())
            throw ShapeError("covariance matrix is not square");
        const double scale = std::max(1.0, v.cwiseAbs().maxCoeff());
        if ((v - v.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            throw NumericError("covariance matrix is not symmetric");
        Eigen::LLT<Eigen::MatrixXd> llt(v);
        if (llt.info() != Eigen::Success)
            throw NumericError("covariance matrix is not positive definite");
    }
}

void RealizedPanel::validate() const {
    if (static_cast<int>(dates.size()) != n_days())
        throw ShapeError("panel dates and returns disagree on length");
    if (n_assets() < 2) throw ShapeError("panel needs at least 2 assets");
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            std::ostringstream msg;
            msg << "panel dates not strictly increasing at row " << i << " ("
                << dates[i - 1] << " -> " << dates[i] << ")";
            throw LoadError(msg.str());
        }
    }
    if (!returns.allFinite())
        throw NumericError("panel contains non-finite returns");
}

void clamp_floor_row(Eigen::Ref<Eigen::RowVectorXd> row, double floor) {
    const int n = static_cast<int>(row.size());
    if (row.minCoeff() >= floor) return;  // fixed point: bitwise unchanged

    std::vector<bool> at_floor(static_cast<std::size_t>(n), false);
    // Clamping may push previously-free coordinates under the floor after the
    // rescale, so iterate until the clamp set is stable (at most n rounds).
    for (int round = 0; round < n; ++round) {
        bool any_below = false;
        for (int i = 0; i < n; ++i) {
            if (!at_floor[static_cast<std::size_t>(i)] && row[i] < floor) {
                row[i] = floor;
                at_floor[static_cast<std::size_t>(i)] = true;
                any_below = true;
            }
        }
        if (!any_below && round > 0) return;

        int n_clamped = 0;
        double free_sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (at_floor[static_cast<std::size_t>(i)])
                ++n_clamped;
            else
                free_sum += row[i];
        }
        if (n_clamped == n || free_sum <= 0.0) {
            row.setConstant(1.0 / n);  // degenerate input, nothing to rescale
            return;
        }
        const double target = 1.0 - n_clamped * floor;
        const double scale = target / free_sum;
        for (int i = 0; i < n; ++i) {
            if (!at_floor[static_cast<std::size_t>(i)]) row[i] *= scale;
        }
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            if (row[i] < floor) { ok = false; break; }
        }
        if (ok) return;
    }
}

AllocationPath clamp_floor(const AllocationPath& path, double floor) {
    const int n = path.n_assets();
    if (!(floor > 0.0) || !(floor < 1.0 / n))
        throw std::invalid_argument("floor must lie in (0, 1/N)");
    AllocationPath out = path;
    for (int s = 0; s < out.horizon(); ++s)
        clamp_floor_row(out.stages.row(s), floor);
    return out;
}

double simplex_residual(const AllocationPath& path) {
    double worst = 0.0;
    for (int s = 0; s < path.horizon(); ++s) {
        double positive_mass = 0.0;
        double most_negative = 0.0;
        for (int i = 0; i < path.n_assets(); ++i) {
            const double z = path.stages(s, i);
            if (z > 0.0)
                positive_mass += z;
            else
                most_negative = std::min(most_negative, z);
        }
        const double r = std::abs(positive_mass - 1.0) - most_negative;
        worst = std::max(worst, r);
    }
    return worst;
}

}  // namespace ipmo
