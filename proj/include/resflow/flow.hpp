#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "resflow/scattering.hpp"

namespace resflow {

/// A continuous family t in [0,1] -> k x k matrix, normally unitary.
struct UnitaryPath {
    std::function<ComplexMatrix(double)> evaluate;
    std::function<double(double)> parameter;        // physical parameter (y or Re s) reported per sample
    std::string description;
    std::vector<std::pair<double, double>> gaps;    // open t-intervals that are never evaluated
    bool unitary = true;                            // when set, each sample must satisfy ||S*S - I|| <= tol_unitary
};

UnitaryPath reverse(const UnitaryPath& path);

/// Legs are traversed in order, each on an equal share of [0,1].
UnitaryPath concatenate(const std::vector<UnitaryPath>& legs);

struct Trajectory {
    std::vector<double> t;
    std::vector<double> param;
    std::vector<std::vector<cplx>> eigenvalues;  // [sample][track]
    std::vector<std::vector<double>> phases;     // [sample][track], continuous lift
    std::vector<cplx> determinants;              // det of the path matrix, by LU
    int refinement_depth = 0;
    std::string description;

    std::size_t samples() const { return t.size(); }
    std::size_t tracks() const { return eigenvalues.empty() ? 0 : eigenvalues.front().size(); }

    /// Sum over tracks of (phi(end) - phi(start)) / 2pi.
    double phase_winding() const;
};

/// Tracks eigenvalues by optimal assignment between consecutive samples,
/// bisecting steps where a matched eigenvalue moves by more than
/// max_step_phase (or det by more than pi/2).
Trajectory track_eigenvalues(const UnitaryPath& path, int initial_samples, const ToleranceConfig& tol = {});

struct CrossingCount {
    std::vector<int> per_track;  // net anticlockwise passages through e^{i theta}
    int mu = 0;                  // -sum(per_track): clockwise counted positively
};

/// Throws InvalidArgument when theta is inside the margin around 0, and
/// PhaseOnTarget when an endpoint phase equals theta mod 2pi within 1e-6.
CrossingCount crossings(const Trajectory& trajectory, double theta, const ToleranceConfig& tol = {});

struct FlowResult {
    int mu = 0;
    double theta = 0.0;
    std::vector<int> per_track_crossings;
    int det_winding = 0;
    double det_winding_raw = 0.0;    // det phase change / 2pi
    double phase_winding_raw = 0.0;  // sum of per-track phase changes / 2pi
    int refinement_depth = 0;
    int samples = 0;
    double y_max = 0.0;
    Trajectory trajectory;
};

FlowResult flow_result(Trajectory trajectory, double theta, const ToleranceConfig& tol = {});

struct FlowOptions {
    int initial_samples = 65;
};

/// Smallest Y = 2^m >= 1 with ||T_{lambda+iY}|| ||J|| <= 0.1, every eigenvalue
/// of S(lambda+iY, 1) within theta_margin/2 of 1, and ||F||^2 ||J|| / Y <= 0.004,
/// which bounds ||S(lambda+iy, s) - I|| < 0.01 for all y >= Y and |s| <= 1.
double choose_y_max(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol = {});

/// t -> S(lambda + i y(t), s), y running from y_from to y_to with geometric
/// concentration near whichever endpoint is 0.
UnitaryPath y_path(const ValidatedInstance& inst, double lambda, double s, double y_from, double y_to,
                   const ToleranceConfig& tol = {});

/// Eigenvalue trajectory of S(lambda + i y, 1), y : 0 -> Y_max.
Trajectory mu_trajectory(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol = {},
                         FlowOptions opts = {});

FlowResult mu_invariant(const ValidatedInstance& inst, double lambda, double theta, const ToleranceConfig& tol = {},
                        FlowOptions opts = {});

/// Trajectory of S(lambda + i0, s), s : 1 -> 0, with balls of radius
/// 1e-4 around real resonance points excised.
Trajectory mu_a_trajectory(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol = {},
                           FlowOptions opts = {});

FlowResult mu_a_invariant(const ValidatedInstance& inst, double lambda, double theta,
                          const ToleranceConfig& tol = {}, FlowOptions opts = {});

/// mu of (y: 0 -> y0 at s = 1), (s: 1 -> 0 at y = y0 with upper semicircles
/// of radius rho around real resonance points), (y: y0 -> 0 at s = 0).
FlowResult mu_a_contour(const ValidatedInstance& inst, double lambda, double theta, double y0, double rho,
                        const ToleranceConfig& tol = {}, FlowOptions opts = {});

/// Same composite path without detours: its mu equals mu_invariant.
FlowResult mu_rectangle(const ValidatedInstance& inst, double lambda, double theta, double y0,
                        const ToleranceConfig& tol = {}, FlowOptions opts = {});

/// `count` angles evenly spread over (theta_margin, 2pi - theta_margin).
std::vector<double> theta_grid(int count, const ToleranceConfig& tol = {});

struct SingularFlow {
    int mu_s = 0;
    std::vector<double> thetas;
    std::vector<int> mu;
    std::vector<int> mu_a;
    FlowResult mu_flow;    // at thetas.front()
    FlowResult mu_a_flow;  // at thetas.front()
};

/// mu(theta) - mu_a(theta) over the grid; throws ThetaDependence if not constant.
SingularFlow singular_flow(const ValidatedInstance& inst, double lambda, std::span<const double> thetas,
                           const ToleranceConfig& tol = {}, FlowOptions opts = {});

int mu_singular(const ValidatedInstance& inst, double lambda, std::span<const double> thetas,
                const ToleranceConfig& tol = {}, FlowOptions opts = {});

/// Header: t,param,track0_re,track0_im,track0_phase,track1_re,...
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace resflow
