#pragma once

#include "resflow/resolvent.hpp"

namespace resflow {

/// Everything the stationary formula needs at a fixed energy z, computed once
/// and reused for every coupling s evaluated at that z.
struct ScatteringContext {
    SpectralParameter z;
    ComplexMatrix T;          // T_z(H0)
    ComplexMatrix T_conj;     // T_{conj z}(H0) = T*
    ComplexMatrix im_T;       // Im T_z(H0)
    ComplexMatrix sqrt_im_T;  // sqrt(Im T_z(H0))
    ComplexMatrix J;

    Eigen::Index k() const { return T.rows(); }
};

ScatteringContext scattering_context(const ValidatedInstance& inst, SpectralParameter z,
                                     const ToleranceConfig& tol = {});

struct ScatteringMatrix {
    SpectralParameter z;
    cplx s;
    ComplexMatrix S;
};

struct MFunction {
    SpectralParameter z;
    cplx s;
    ComplexMatrix M;
    double form_residual = 0.0;  // ||product form - (1 - 2is Im T J (1+sTJ)^{-1})||
};

/// S(z,s) = 1 - 2is sqrt(Im T_z) J (1 + s T_z J)^{-1} sqrt(Im T_z).
/// Throws ResonantParameter when 1 + s T_z J is numerically singular.
ScatteringMatrix scattering_matrix(const ScatteringContext& ctx, cplx s, const ToleranceConfig& tol = {});
ScatteringMatrix scattering_matrix(const ValidatedInstance& inst, SpectralParameter z, cplx s,
                                   const ToleranceConfig& tol = {});

/// M(z,s) = (1 + s T_{conj z} J)(1 + s T_z J)^{-1}.
MFunction m_function(const ScatteringContext& ctx, cplx s, const ToleranceConfig& tol = {});
MFunction m_function(const ValidatedInstance& inst, SpectralParameter z, cplx s, const ToleranceConfig& tol = {});

/// ||sqrt(Im T) S - M sqrt(Im T)||.
double intertwining_residual(const ScatteringContext& ctx, cplx s, const ToleranceConfig& tol = {});
double intertwining_residual(const ValidatedInstance& inst, SpectralParameter z, cplx s,
                             const ToleranceConfig& tol = {});

enum class CriticalKind { NonCritical, Resonant, AntiResonant, Both };

const char* to_string(CriticalKind kind) noexcept;

struct InvertibilityReport {
    double sigma_S = 0.0;            // NaN when s is resonant (S has a pole there)
    double sigma_resonant = 0.0;     // sigma_min(1 + s T_z J)
    double sigma_antiresonant = 0.0; // sigma_min(1 + s T_{conj z} J)
    CriticalKind kind = CriticalKind::NonCritical;
};

/// Requires y > 0. Classification uses sigma_min <= tol_critical * ||.||.
InvertibilityReport invertibility_check(const ValidatedInstance& inst, SpectralParameter z, cplx s,
                                        const ToleranceConfig& tol = {});

/// ||(I - P) S P|| with P the orthogonal projector onto range(Im T_z).
double range_preservation_residual(const ValidatedInstance& inst, SpectralParameter z, cplx s,
                                   const ToleranceConfig& tol = {});

/// ||S* S - I||.
double unitarity_defect(const ComplexMatrix& s);

/// 1 + s T J for the given T.
ComplexMatrix coupling_operator(const ComplexMatrix& t, const ComplexMatrix& j, cplx s);

}  // namespace resflow
