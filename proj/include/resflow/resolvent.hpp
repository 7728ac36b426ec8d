#pragma once

#include <span>
#include <vector>

#include "resflow/model.hpp"

namespace resflow {

/// T_z(H_s) = F (H_s - z)^{-1} F* for a fixed base coupling s.
struct SandwichedResolvent {
    SpectralParameter z;
    double s_base = 0.0;
    ComplexMatrix T;  // k x k

    /// T_{conj(z)}(H_s), which in finite dimension is exactly T*.
    ComplexMatrix conjugate() const { return T.adjoint(); }
};

/// Computes T by k linear solves against the columns of F*. At y = 0 the
/// boundary value is computed directly and returned exactly Hermitian.
/// Throws LambdaInSpectrum when y = 0 and lambda is within
/// 10 * tol_sing * ||H_s|| of spec(H_s).
SandwichedResolvent sandwiched_resolvent(const ValidatedInstance& inst, double s_base, SpectralParameter z,
                                         const ToleranceConfig& tol = {});

/// Same, for an arbitrary complex energy (no realness shortcut).
ComplexMatrix sandwiched_resolvent_at(const ValidatedInstance& inst, double s_base, cplx z,
                                      const ToleranceConfig& tol = {});

/// Im T = (T - T*) / (2i), exactly Hermitian. For y > 0 throws
/// NotPositiveSemidefinite when an eigenvalue is below -tol_psd * ||T||.
ComplexMatrix im_part(const SandwichedResolvent& t, const ToleranceConfig& tol = {});

/// ||T_{lambda + i y}(H0)|| for each y in the list.
std::vector<double> t_norm_decay(const ValidatedInstance& inst, double lambda, std::span<const double> ys,
                                 const ToleranceConfig& tol = {});

/// The resolvent F R_z R_w F* used for the first resolvent identity check.
ComplexMatrix resolvent_product(const ValidatedInstance& inst, cplx z, cplx w);

}  // namespace resflow
