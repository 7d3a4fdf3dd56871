#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "ipmo/errors.hpp"

namespace ipmo {

/// Stage-major matrix: row s holds the N asset values for stage (or date) s.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Parameters of the smoothed multi-period mean-variance program.
struct ProblemParams {
    double risk_aversion = 1.0;    ///< weight on the quadratic risk term, > 0
    double turnover_weight = 0.0;  ///< weight on the smoothed trade penalty, >= 0
    double smoothing = 1e-4;       ///< perturbation inside sqrt(x^2 + smoothing), > 0
    int horizon = 1;               ///< number of planning stages H, >= 1
    int n_assets = 2;              ///< N, >= 2
    double cov_jitter = 1e-6;      ///< ridge added to covariance diagonals, >= 0

    void validate() const;
};

/// A planned allocation path: the pre-trade weights held going into the
/// decision plus one target weight vector per stage. Each stage row lives on
/// the probability simplex (long-only, fully invested).
struct AllocationPath {
    Vector pre_trade;  ///< N-vector of weights held before the first trade
    Matrix stages;     ///< H x N, row s is the target for stage s

    AllocationPath() = default;
    AllocationPath(Vector pre, Matrix target)
        : pre_trade(std::move(pre)), stages(std::move(target)) {}

    int horizon() const { return static_cast<int>(stages.rows()); }
    int n_assets() const { return static_cast<int>(stages.cols()); }

    /// Pre-trade weights replicated across all stages (the zero-trade path).
    static AllocationPath replicate(const Vector& pre, int horizon);
};

/// Predicted per-stage simple returns parameterizing the inner program.
struct ForecastPath {
    Matrix returns;  ///< H x N

    int horizon() const { return static_cast<int>(returns.rows()); }
    int n_assets() const { return static_cast<int>(returns.cols()); }
    void validate() const;
};

/// Per-stage positive definite covariance forecasts. Because the information
/// set is frozen at the decision date, the common case is one matrix shared
/// by every stage; the shared representation avoids H copies.
class CovariancePath {
  public:
    CovariancePath() = default;
    explicit CovariancePath(std::vector<Eigen::MatrixXd> per_stage);
    static CovariancePath replicated(Eigen::MatrixXd cov, int horizon);

    const Eigen::MatrixXd& at(int stage) const {
        return shared_ ? mats_.front() : mats_[static_cast<std::size_t>(stage)];
    }
    int horizon() const { return horizon_; }
    int n_assets() const {
        return mats_.empty() ? 0 : static_cast<int>(mats_.front().rows());
    }

    /// Checks symmetry (1e-12) and positive definiteness via Cholesky.
    void validate() const;

  private:
    std::vector<Eigen::MatrixXd> mats_;
    int horizon_ = 0;
    bool shared_ = false;
};

/// Realized daily simple returns for N assets over T ordered trading dates.
struct RealizedPanel {
    std::vector<std::string> dates;  ///< ISO-8601, strictly increasing
    Matrix returns;                  ///< T x N

    int n_days() const { return static_cast<int>(returns.rows()); }
    int n_assets() const { return static_cast<int>(returns.cols()); }
    void validate() const;
};

/// Raises every stage coordinate to at least `floor` and rescales the
/// remaining coordinates so each row sums to one again. A row already at or
/// above the floor is returned unchanged, which makes the operation exactly
/// idempotent. Requires floor in (0, 1/N).
AllocationPath clamp_floor(const AllocationPath& path, double floor);

/// In-place single-row variant of clamp_floor.
void clamp_floor_row(Eigen::Ref<Eigen::RowVectorXd> row, double floor);

/// Worst-row infeasibility measure: excess of the positive mass over one plus
/// the magnitude of the most negative coordinate. Zero exactly on feasible
/// paths.
double simplex_residual(const AllocationPath& path);

/// Simplex feasibility tolerance used across the library.
inline constexpr double kSimplexTol = 1e-12;

}  // namespace ipmo
