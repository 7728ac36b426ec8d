#include "resflow/scattering.hpp"

#include <cmath>
#include <limits>

#include "resflow/error.hpp"

namespace resflow {

namespace {

constexpr cplx kI{0.0, 1.0};

// Size of 1 + s T J when nothing cancels; the singularity tests are relative
// to this rather than to ||1 + s T J||, which vanishes at a scalar resonance.
double coupled_scale(const ComplexMatrix& t, const ComplexMatrix& j, cplx s) {
    return 1.0 + std::abs(s) * numerics::norm2(t * j);
}

numerics::LinearSolution solve_coupled(const ComplexMatrix& a, const ComplexMatrix& b, double scale,
                                       const ToleranceConfig& tol) {
    numerics::LinearSolution x;
    try {
        x = numerics::solve(a, b, tol.tol_sing);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NumericallySingular) throw;
        x.sigma_min = 0.0;
    }
    if (!(x.sigma_min > tol.tol_sing * scale))
        throw Error(ErrorCode::ResonantParameter, "1 + s T_z J is singular: s is at or near a resonance point");
    return x;
}

}  // namespace

const char* to_string(CriticalKind kind) noexcept {
    switch (kind) {
        case CriticalKind::NonCritical: return "non-critical";
        case CriticalKind::Resonant: return "resonant";
        case CriticalKind::AntiResonant: return "anti-resonant";
        case CriticalKind::Both: return "resonant+anti-resonant";
    }
    return "unknown";
}

ComplexMatrix coupling_operator(const ComplexMatrix& t, const ComplexMatrix& j, cplx s) {
    ComplexMatrix a = s * (t * j);
    a.diagonal().array() += 1.0;
    return a;
}

ScatteringContext scattering_context(const ValidatedInstance& inst, SpectralParameter z, const ToleranceConfig& tol) {
    const SandwichedResolvent r = sandwiched_resolvent(inst, 0.0, z, tol);
    ScatteringContext ctx;
    ctx.z = z;
    ctx.T = r.T;
    ctx.T_conj = r.conjugate();
    ctx.im_T = im_part(r, tol);
    ctx.sqrt_im_T = z.y == 0.0 ? ComplexMatrix::Zero(ctx.k(), ctx.k()) : numerics::psd_sqrt(ctx.im_T, tol.tol_psd);
    ctx.J = inst.J();
    return ctx;
}

ScatteringMatrix scattering_matrix(const ScatteringContext& ctx, cplx s, const ToleranceConfig& tol) {
    const Eigen::Index k = ctx.k();
    const ComplexMatrix a = coupling_operator(ctx.T, ctx.J, s);
    const auto x = solve_coupled(a, ctx.sqrt_im_T, coupled_scale(ctx.T, ctx.J, s), tol);
    ComplexMatrix S = ComplexMatrix::Identity(k, k) - 2.0 * kI * s * ctx.sqrt_im_T * ctx.J * x.x;
    return {ctx.z, s, std::move(S)};
}

ScatteringMatrix scattering_matrix(const ValidatedInstance& inst, SpectralParameter z, cplx s,
                                   const ToleranceConfig& tol) {
    return scattering_matrix(scattering_context(inst, z, tol), s, tol);
}

MFunction m_function(const ScatteringContext& ctx, cplx s, const ToleranceConfig& tol) {
    const Eigen::Index k = ctx.k();
    const ComplexMatrix a = coupling_operator(ctx.T, ctx.J, s);
    const ComplexMatrix a_conj = coupling_operator(ctx.T_conj, ctx.J, s);
    // M A = A_conj  <=>  A* M* = A_conj*.
    const double scale = coupled_scale(ctx.T, ctx.J, s);
    const auto mt = solve_coupled(a.adjoint(), a_conj.adjoint(), scale, tol);
    ComplexMatrix m = mt.x.adjoint();
    // Second form: 1 - 2is Im T J (1 + sTJ)^{-1}, again via a right solve.
    const auto inv_t = solve_coupled(a.adjoint(), (ctx.im_T * ctx.J).adjoint(), scale, tol);
    const ComplexMatrix second = ComplexMatrix::Identity(k, k) - 2.0 * kI * s * inv_t.x.adjoint();
    const double residual = numerics::norm2(m - second);
    return {ctx.z, s, std::move(m), residual};
}

MFunction m_function(const ValidatedInstance& inst, SpectralParameter z, cplx s, const ToleranceConfig& tol) {
    return m_function(scattering_context(inst, z, tol), s, tol);
}

double intertwining_residual(const ScatteringContext& ctx, cplx s, const ToleranceConfig& tol) {
    const ScatteringMatrix S = scattering_matrix(ctx, s, tol);
    const MFunction M = m_function(ctx, s, tol);
    return numerics::norm2(ctx.sqrt_im_T * S.S - M.M * ctx.sqrt_im_T);
}

double intertwining_residual(const ValidatedInstance& inst, SpectralParameter z, cplx s, const ToleranceConfig& tol) {
    return intertwining_residual(scattering_context(inst, z, tol), s, tol);
}

InvertibilityReport invertibility_check(const ValidatedInstance& inst, SpectralParameter z, cplx s,
                                        const ToleranceConfig& tol) {
    if (!(z.y > 0.0)) throw Error(ErrorCode::InvalidArgument, "invertibility_check requires y > 0");
    const ScatteringContext ctx = scattering_context(inst, z, tol);
    const ComplexMatrix a = coupling_operator(ctx.T, ctx.J, s);
    const ComplexMatrix a_conj = coupling_operator(ctx.T_conj, ctx.J, s);
    InvertibilityReport rep;
    rep.sigma_resonant = numerics::sigma_min(a);
    rep.sigma_antiresonant = numerics::sigma_min(a_conj);
    const double scale = coupled_scale(ctx.T, ctx.J, s);
    const bool resonant = rep.sigma_resonant <= tol.tol_critical * scale;
    const bool anti = rep.sigma_antiresonant <= tol.tol_critical * scale;
    if (resonant && anti) rep.kind = CriticalKind::Both;
    else if (resonant) rep.kind = CriticalKind::Resonant;
    else if (anti) rep.kind = CriticalKind::AntiResonant;
    if (resonant) {
        rep.sigma_S = std::numeric_limits<double>::quiet_NaN();
    } else {
        rep.sigma_S = numerics::sigma_min(scattering_matrix(ctx, s, tol).S);
    }
    return rep;
}

double range_preservation_residual(const ValidatedInstance& inst, SpectralParameter z, cplx s,
                                   const ToleranceConfig& tol) {
    const ScatteringContext ctx = scattering_context(inst, z, tol);
    const Eigen::Index k = ctx.k();
    const ComplexMatrix p = numerics::range_projector(ctx.im_T, tol.tol_psd);
    const ComplexMatrix S = scattering_matrix(ctx, s, tol).S;
    return numerics::norm2((ComplexMatrix::Identity(k, k) - p) * S * p);
}

double unitarity_defect(const ComplexMatrix& s) {
    return numerics::norm2(s.adjoint() * s - ComplexMatrix::Identity(s.rows(), s.cols()));
}

}  // namespace resflow
