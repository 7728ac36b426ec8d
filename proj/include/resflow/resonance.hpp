#pragma once

#include <vector>

#include "resflow/scattering.hpp"

namespace resflow {

/// A real resonance point at z = lambda + i0, or a member of its group at y > 0.
struct ResonancePoint {
    cplx location;
    int multiplicity = 1;           // eigenvalue-cluster count at y = 0
    int contour_multiplicity = 0;   // winding of det(1 + s T J) around the point; 0 if not computed
    int group_id = 0;
    double base_y = 0.0;
    double s_base = 0.0;
    double cluster_radius = 0.0;    // cluster_factor * distance to nearest other point or window edge
};

struct PointIndex {
    double location = 0.0;
    int multiplicity = 0;
    int n_plus = 0;
    int n_minus = 0;
    int index = 0;
    double y_used = 0.0;
    double cluster_radius = 0.0;
    std::vector<cplx> group;
};

struct IndexReport {
    std::vector<PointIndex> points;
    int total = 0;
};

/// All coupling values r = s_base - 1/sigma, sigma a non-zero eigenvalue of
/// T_z(H_{s_base}) J, at an arbitrary complex energy z. Unfiltered and unclustered.
std::vector<cplx> resonance_locations(const ValidatedInstance& inst, cplx z, double s_base = 0.0,
                                      const ToleranceConfig& tol = {});

/// Real resonance points at lambda + i0 inside the window, with multiplicity.
/// Throws LambdaInSpectrum (s_base = 0) or BasePointResonant (s_base resonant).
std::vector<ResonancePoint> resonance_points(const ValidatedInstance& inst, double lambda, double s_base,
                                             CouplingWindow window, const ToleranceConfig& tol = {});

/// The shifted points of the group of `point` at lambda + i y. Throws
/// ClusterSeparationFailure when the number of shifted points within the
/// cluster radius differs from the multiplicity.
std::vector<cplx> resonance_group(const ValidatedInstance& inst, double lambda, const ResonancePoint& point, double y,
                                  const ToleranceConfig& tol = {});

/// (N+, N-, N+ - N-) with adaptive y reduction.
PointIndex resonance_index(const ValidatedInstance& inst, double lambda, const ResonancePoint& point,
                           const ToleranceConfig& tol = {});

/// Sum of resonance indices over the window. Throws ResonantEndpoint when a
/// resonance point lies within 1e-8 of either endpoint.
IndexReport total_resonance_index(const ValidatedInstance& inst, double lambda, CouplingWindow window = {},
                                  const ToleranceConfig& tol = {});

/// True when every base produces the same resonance set within 1e-6 relative.
bool base_independence_check(const ValidatedInstance& inst, double lambda, CouplingWindow window,
                             std::span<const double> s_bases, const ToleranceConfig& tol = {});

struct CrossingReport {
    int net = 0;                     // upward minus downward crossings of level lambda
    std::vector<double> locations;   // bisection-refined crossing couplings
    std::vector<int> directions;     // +1 upward, -1 downward
};

/// Independent oracle: signed eigenvalue crossings of level lambda by H_s over
/// the window, by dense eigendecomposition on an s-grid with bisection at
/// count changes. Throws CrossingAtEndpoint.
CrossingReport crossing_oracle(const ValidatedInstance& inst, double lambda, CouplingWindow window, int grid_size,
                               const ToleranceConfig& tol = {});

}  // namespace resflow
