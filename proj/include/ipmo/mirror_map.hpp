#pragma once

#include "ipmo/objective.hpp"
#include "ipmo/types.hpp"

namespace ipmo {

/// One evaluation of the stagewise multiplicative-update map
///
///   Phi_s(z)_i = z_{s,i} exp(a_{s,i}) / sum_j z_{s,j} exp(a_{s,j}),
///   a_s = -step_size * grad_s F(z),
///
/// together with the intermediates needed by its derivatives. The stored
/// exponentials are shifted by the per-stage maximum of a for stability;
/// `exp_weights` and `normalizers` share the shift, so `next` and every
/// derivative formula built from them are unaffected.
struct MirrorMapEval {
    Matrix stage_grads;   ///< g, H x N
    Matrix scaled_grads;  ///< a = -step_size * g (unshifted)
    Matrix exp_factors;   ///< exp(a - rowmax(a))
    Matrix exp_weights;   ///< r = z .* exp_factors
    Vector normalizers;   ///< M_s = sum_i r_{s,i}
    Matrix next;          ///< Phi rows = r / M, each on the simplex
    Matrix trade_curv;    ///< smooth_abs_curv rows, for Hessian products
    double step_size = 0.0;
};

MirrorMapEval evaluate_mirror_map(const AllocationPath& path,
                                  const ProblemParams& params,
                                  const ForecastPath& forecast,
                                  const CovariancePath& cov, double step_size);

}  // namespace ipmo
