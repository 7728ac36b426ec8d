#pragma once

#include <functional>
#include <span>
#include <vector>

#include "resflow/resonance.hpp"

namespace resflow {

/// Anticlockwise sampled circle in the coupling-constant plane.
struct Contour {
    cplx center;
    double radius = 0.0;
    int samples = 64;

    cplx point(double angle) const { return center + radius * std::polar(1.0, angle); }
};

struct WindingResult {
    int winding = 0;
    double raw_phase_change = 0.0;  // radians
    int refinement_depth = 0;
    int evaluations = 0;
};

using MatrixFunction = std::function<ComplexMatrix(cplx)>;

/// Argument Principle: number of turns of det f(s) around zero as s runs once
/// anticlockwise along the contour (zeros minus poles enclosed). Steps with
/// |delta arg| > pi/2 are bisected. Throws ZeroOnContour, RefinementExhausted.
WindingResult det_winding(const MatrixFunction& f, const Contour& contour, const ToleranceConfig& tol = {});

/// Unwrapped argument change along an already sampled sequence of non-zero
/// values (open or closed). winding is the raw change / 2pi rounded.
WindingResult sampled_winding(std::span<const cplx> values);

/// Resonance and anti-resonance points of the coupling plane at lambda + i y.
struct CriticalPoints {
    std::vector<cplx> resonances;
    std::vector<cplx> anti_resonances;
};

CriticalPoints critical_points(const ValidatedInstance& inst, double lambda, double y, const ToleranceConfig& tol = {});

/// Throws CriticalPointNearContour when a critical point lies in the annulus
/// [0.5 r, 1.5 r] around the contour's center, or when sigma_min of
/// 1 + s T J (and 1 + s T* J when `include_anti`) drops below 1e-6 * scale
/// on a sample.
void certify_contour(const ValidatedInstance& inst, double lambda, double y, const Contour& contour,
                     bool include_anti, const ToleranceConfig& tol = {});

/// Total algebraic multiplicity of resonance points inside the contour, as the
/// winding of det(1 + s T_{lambda+iy}(H0) J). y = 0 uses the boundary value.
int resonance_multiplicity_contour(const ValidatedInstance& inst, double lambda, double y, cplx center, double radius,
                                   const ToleranceConfig& tol = {});

/// S-index: winding of det S(lambda + i y, s) around the contour. Requires y > 0.
int s_index(const ValidatedInstance& inst, double lambda, double y, cplx center, double radius,
            const ToleranceConfig& tol = {});

/// Sum of S-indices over clockwise minimal contours around the upper
/// half-plane critical points of the group of `point` at lambda + i y. Equals
/// the resonance index N+ - N-. Near resonance / anti-resonance collisions
/// y is jittered by +-20%; persistent collisions throw CollisionDetected.
int group_s_index(const ValidatedInstance& inst, double lambda, const ResonancePoint& point, double y,
                  const ToleranceConfig& tol = {});

struct ContourTracking {
    std::vector<int> permutation;              // track j ends where track permutation[j] started
    std::vector<std::vector<int>> cycles;
    std::vector<double> cycle_windings;        // total phase change / 2pi per cycle
    std::vector<double> track_windings;        // per track, possibly fractional
    double total_winding = 0.0;
};

/// Follows the eigenvalues of S(lambda + i y, s) once around the contour.
ContourTracking track_contour(const ValidatedInstance& inst, double lambda, double y, const Contour& contour,
                              const ToleranceConfig& tol = {});

}  // namespace resflow
