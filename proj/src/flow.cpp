#include "resflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "resflow/contour.hpp"
#include "resflow/error.hpp"
#include "resflow/resonance.hpp"

namespace resflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kExcisionFraction = 1e-4;

double wrap(double a) {
    // into (-pi, pi]
    a = std::remainder(a, kTwoPi);
    if (a <= -std::numbers::pi) a += kTwoPi;
    return a;
}

double step_cost(cplx a, cplx b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma == 0.0 || mb == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(wrap(std::arg(b) - std::arg(a))) + std::abs(std::log(mb / ma));
}

struct Sample {
    double t = 0.0;
    std::vector<cplx> eig;
    cplx det;
};

Sample evaluate(const UnitaryPath& path, double t, const ToleranceConfig& tol) {
    const ComplexMatrix m = path.evaluate(t);
    if (path.unitary && unitarity_defect(m) > tol.tol_unitary) {
        throw Error(ErrorCode::InvalidArgument,
                    "path '" + path.description + "' is not unitary at t = " + std::to_string(t));
    }
    return {t, numerics::general_eig(m), numerics::det(m)};
}

bool is_gap(const UnitaryPath& path, double a, double b) {
    for (const auto& [lo, hi] : path.gaps)
        if (a == lo && b == hi) return true;
    return false;
}

bool inside_gap(const UnitaryPath& path, double t) {
    for (const auto& [lo, hi] : path.gaps)
        if (t > lo && t < hi) return true;
    return false;
}

// 0 -> y_to, linear below y_min and geometric above it.
double ramp(double t, double y_to, double y_min) {
    if (y_to <= 0.0) return 0.0;
    const double ratio = y_to / y_min;
    if (ratio <= std::numbers::e) return y_to * t;
    const double alpha = std::log(ratio);
    return y_to * std::expm1(alpha * t) / std::expm1(alpha);
}

void require_nonresonant_unit_coupling(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol) {
    for (const cplx r : resonance_locations(inst, {lambda, 0.0}, 0.0, tol)) {
        if (std::abs(r.imag()) <= tol.tol_real * std::abs(r) && std::abs(r.real() - 1.0) <= 1e-8)
            throw Error(ErrorCode::ResonantEndpoint, "s = 1 is a resonance point");
    }
}

std::vector<double> real_resonances(const ValidatedInstance& inst, double lambda, double lo, double hi,
                                    const ToleranceConfig& tol) {
    std::vector<double> out;
    for (const cplx r : resonance_locations(inst, {lambda, 0.0}, 0.0, tol)) {
        if (std::abs(r.imag()) <= tol.tol_real * std::abs(r) && r.real() > lo && r.real() < hi)
            out.push_back(r.real());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= 1e-9; }),
              out.end());
    return out;
}

struct CouplingPiece {
    bool arc = false;
    double from = 0.0;    // segment start, or arc center
    double to = 0.0;      // segment end
    double radius = 0.0;  // arc radius
    double length = 0.0;
};

// Piecewise curve 1 -> 0 in the coupling plane, replacing [r - rho, r + rho]
// by the upper semicircle for each detour center r.
std::vector<CouplingPiece> coupling_pieces(std::vector<double> centers, double rho) {
    std::sort(centers.begin(), centers.end(), std::greater<>());
    std::vector<CouplingPiece> pieces;
    double cursor = 1.0;
    for (const double r : centers) {
        if (r + rho >= cursor || r - rho <= 0.0)
            throw Error(ErrorCode::InvalidArgument, "detour discs overlap each other or the window ends");
        pieces.push_back({false, cursor, r + rho, 0.0, cursor - (r + rho)});
        pieces.push_back({true, r, r, rho, std::numbers::pi * rho});
        cursor = r - rho;
    }
    pieces.push_back({false, cursor, 0.0, 0.0, cursor});
    return pieces;
}

cplx piece_point(const std::vector<CouplingPiece>& pieces, double t) {
    double total = 0.0;
    for (const auto& p : pieces) total += p.length;
    double at = std::clamp(t, 0.0, 1.0) * total;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& p = pieces[i];
        if (at <= p.length || i + 1 == pieces.size()) {
            const double u = p.length > 0.0 ? std::clamp(at / p.length, 0.0, 1.0) : 1.0;
            if (p.arc) return p.from + std::polar(p.radius, std::numbers::pi * u);
            return {p.from + u * (p.to - p.from), 0.0};
        }
        at -= p.length;
    }
    return {0.0, 0.0};
}

// Straight s: 1 -> 0 at small y0 passes within O(y0) of resonance points,
// where an eigenvalue turns once over a stretch of width O(y0). The warp
// G(s) = s + sum atan((s - a)/b) / pi gives each such point as much of the
// parameter as the whole segment, spread uniformly in phase.
class CouplingWarp {
public:
    explicit CouplingWarp(std::vector<cplx> points) : points_(std::move(points)) {
        g0_ = g(0.0);
        g1_ = g(1.0);
    }

    // t in [0,1] -> s in [1, 0].
    double s_at(double t) const {
        const double target = g1_ - std::clamp(t, 0.0, 1.0) * (g1_ - g0_);
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) < target ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    double g(double s) const {
        double v = s;
        for (const cplx r : points_) v += std::atan((s - r.real()) / std::abs(r.imag())) / std::numbers::pi;
        return v;
    }

    std::vector<cplx> points_;
    double g0_ = 0.0, g1_ = 1.0;
};

UnitaryPath coupling_leg(const ValidatedInstance& inst, double lambda, double y0, const std::vector<double>& detours,
                         double rho, const ToleranceConfig& tol) {
    const ScatteringContext ctx = scattering_context(inst, {lambda, y0}, tol);
    UnitaryPath p;
    if (detours.empty()) {
        std::vector<cplx> near;
        for (const cplx r : resonance_locations(inst, cplx(lambda, y0), 0.0, tol))
            if (std::abs(r.imag()) > 0.0 && std::abs(r.imag()) < 0.5 && r.real() > -0.5 && r.real() < 1.5)
                near.push_back(r);
        const CouplingWarp warp(std::move(near));
        p.evaluate = [ctx, warp, tol](double t) { return scattering_matrix(ctx, warp.s_at(t), tol).S; };
        p.parameter = [warp](double t) { return warp.s_at(t); };
        p.description = "s: 1 -> 0 at y = y0";
        p.unitary = true;
        return p;
    }
    const auto pieces = coupling_pieces(detours, rho);
    p.evaluate = [ctx, pieces, tol](double t) { return scattering_matrix(ctx, piece_point(pieces, t), tol).S; };
    p.parameter = [pieces](double t) { return piece_point(pieces, t).real(); };
    p.description = "s: 1 -> 0 at y = y0 with upper detours";
    p.unitary = false;
    return p;
}

FlowResult composite_flow(const ValidatedInstance& inst, double lambda, double theta, double y0,
                          const std::vector<double>& detours, double rho, const ToleranceConfig& tol,
                          FlowOptions opts) {
    if (!(y0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "composite path requires y0 > 0");
    require_off_spectrum(inst, lambda, tol);
    require_nonresonant_unit_coupling(inst, lambda, tol);
    std::vector<UnitaryPath> legs;
    legs.push_back(y_path(inst, lambda, 1.0, 0.0, y0, tol));
    legs.push_back(coupling_leg(inst, lambda, y0, detours, rho, tol));
    legs.push_back(y_path(inst, lambda, 0.0, y0, 0.0, tol));
    UnitaryPath path = concatenate(legs);
    path.description = detours.empty() ? "rectangle (no detours)" : "rectangle with upper detours";
    const int samples = std::max(opts.initial_samples, 3 * (opts.initial_samples / 2) + 1);
    return flow_result(track_eigenvalues(path, samples, tol), theta, tol);
}

}  // namespace

double Trajectory::phase_winding() const {
    if (phases.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < phases.front().size(); ++j) sum += phases.back()[j] - phases.front()[j];
    return sum / kTwoPi;
}

UnitaryPath reverse(const UnitaryPath& path) {
    UnitaryPath r;
    auto eval = path.evaluate;
    auto param = path.parameter;
    r.evaluate = [eval](double t) { return eval(1.0 - t); };
    r.parameter = [param](double t) { return param ? param(1.0 - t) : 1.0 - t; };
    r.description = "reverse of " + path.description;
    for (const auto& [lo, hi] : path.gaps) r.gaps.emplace_back(1.0 - hi, 1.0 - lo);
    r.unitary = path.unitary;
    return r;
}

UnitaryPath concatenate(const std::vector<UnitaryPath>& legs) {
    if (legs.empty()) throw Error(ErrorCode::InvalidArgument, "cannot concatenate zero paths");
    const double n = static_cast<double>(legs.size());
    auto locate = [n](double t) {
        const double x = std::clamp(t, 0.0, 1.0) * n;
        const int i = std::min(static_cast<int>(x), static_cast<int>(n) - 1);
        return std::pair<int, double>{i, x - i};
    };
    UnitaryPath out;
    out.evaluate = [legs, locate](double t) {
        const auto [i, u] = locate(t);
        return legs[i].evaluate(u);
    };
    out.parameter = [legs, locate](double t) {
        const auto [i, u] = locate(t);
        return legs[i].parameter ? legs[i].parameter(u) : u;
    };
    out.unitary = true;
    for (std::size_t i = 0; i < legs.size(); ++i) {
        out.unitary = out.unitary && legs[i].unitary;
        for (const auto& [lo, hi] : legs[i].gaps) out.gaps.emplace_back((i + lo) / n, (i + hi) / n);
        out.description += (i ? " ++ " : "") + legs[i].description;
    }
    return out;
}

Trajectory track_eigenvalues(const UnitaryPath& path, int initial_samples, const ToleranceConfig& tol) {
    if (initial_samples < 2) throw Error(ErrorCode::InvalidArgument, "track_eigenvalues needs >= 2 samples");

    std::vector<double> grid;
    for (int i = 0; i < initial_samples; ++i) {
        const double t = static_cast<double>(i) / (initial_samples - 1);
        if (!inside_gap(path, t)) grid.push_back(t);
    }
    for (const auto& [lo, hi] : path.gaps) {
        grid.push_back(lo);
        grid.push_back(hi);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const double base_width = 1.0 / (initial_samples - 1);
    const double min_width = base_width * std::ldexp(1.0, -tol.max_adaptive_depth);

    Trajectory traj;
    traj.description = path.description;
    auto record = [&](const Sample& s, const std::vector<double>& phases) {
        traj.t.push_back(s.t);
        traj.param.push_back(path.parameter ? path.parameter(s.t) : s.t);
        traj.eigenvalues.push_back(s.eig);
        traj.phases.push_back(phases);
        traj.determinants.push_back(s.det);
    };

    Sample cur = evaluate(path, grid.front(), tol);
    std::sort(cur.eig.begin(), cur.eig.end(), [](cplx a, cplx b) {
        const double pa = std::arg(a), pb = std::arg(b);
        return pa < pb || (pa == pb && std::abs(a) < std::abs(b));
    });
    std::vector<double> phases(cur.eig.size());
    for (std::size_t j = 0; j < cur.eig.size(); ++j) phases[j] = std::arg(cur.eig[j]);
    record(cur, phases);
    const std::size_t k = cur.eig.size();

    std::vector<Sample> pending;
    for (std::size_t i = grid.size(); i-- > 1;) pending.push_back(evaluate(path, grid[i], tol));

    Eigen::MatrixXd cost(k, k);
    while (!pending.empty()) {
        Sample& next = pending.back();
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) cost(a, b) = step_cost(cur.eig[a], next.eig[b]);
        const auto assign = numerics::optimal_assignment(cost);
        double worst = 0.0;
        for (std::size_t a = 0; a < k; ++a) worst = std::max(worst, cost(a, assign[a]));
        const double det_step = std::abs(wrap(std::arg(next.det / cur.det)));
        const bool gap = is_gap(path, cur.t, next.t);
        const bool rough = worst > tol.max_step_phase || det_step > std::numbers::pi / 2;

        if (gap) {
            if (rough)
                throw Error(ErrorCode::GapTooWide, "eigenvalues jump across an excised interval of '" +
                                                       path.description + "'");
        } else if (rough) {
            const double width = next.t - cur.t;
            if (width > min_width) {
                const double mid = 0.5 * (cur.t + next.t);
                const int depth = static_cast<int>(std::lround(std::log2(base_width / (0.5 * width))));
                traj.refinement_depth = std::max(traj.refinement_depth, depth);
                pending.push_back(evaluate(path, mid, tol));
                continue;
            }
            throw Error(ErrorCode::MatchingAmbiguous,
                        "eigenvalue assignment still moves by " + std::to_string(worst) + " rad at t = " +
                            std::to_string(next.t) + " after maximal refinement of '" + path.description + "'");
        }

        std::vector<cplx> ordered(k);
        for (std::size_t a = 0; a < k; ++a) {
            ordered[a] = next.eig[assign[a]];
            phases[a] += wrap(std::arg(ordered[a]) - std::arg(cur.eig[a]));
        }
        Sample accepted{next.t, std::move(ordered), next.det};
        pending.pop_back();
        cur = std::move(accepted);
        record(cur, phases);
    }
    return traj;
}

CrossingCount crossings(const Trajectory& trajectory, double theta, const ToleranceConfig& tol) {
    if (!(theta > tol.theta_margin && theta < kTwoPi - tol.theta_margin))
        throw Error(ErrorCode::InvalidArgument, "theta must lie in (theta_margin, 2pi - theta_margin)");
    CrossingCount out;
    if (trajectory.phases.empty()) return out;
    const auto& first = trajectory.phases.front();
    const auto& last = trajectory.phases.back();
    for (std::size_t j = 0; j < first.size(); ++j) {
        for (const double phi : {first[j], last[j]}) {
            if (std::abs(wrap(phi - theta)) <= 1e-6)
                throw Error(ErrorCode::PhaseOnTarget, "an endpoint eigenvalue sits on e^{i theta}");
        }
        const int n = static_cast<int>(std::floor((last[j] - theta) / kTwoPi) - std::floor((first[j] - theta) / kTwoPi));
        out.per_track.push_back(n);
        out.mu -= n;
    }
    return out;
}

FlowResult flow_result(Trajectory trajectory, double theta, const ToleranceConfig& tol) {
    FlowResult r;
    const CrossingCount c = crossings(trajectory, theta, tol);
    r.mu = c.mu;
    r.theta = theta;
    r.per_track_crossings = c.per_track;
    const WindingResult w = sampled_winding(trajectory.determinants);
    r.det_winding = w.winding;
    r.det_winding_raw = w.raw_phase_change / kTwoPi;
    r.phase_winding_raw = trajectory.phase_winding();
    r.refinement_depth = trajectory.refinement_depth;
    r.samples = static_cast<int>(trajectory.samples());
    r.trajectory = std::move(trajectory);
    return r;
}

double choose_y_max(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol) {
    const double certificate = inst.norm_F * inst.norm_F * inst.norm_J;
    double y = 1.0;
    for (int i = 0; i < 200; ++i, y *= 2.0) {
        if (certificate / y > 0.004) continue;
        const ComplexMatrix t = sandwiched_resolvent_at(inst, 0.0, {lambda, y}, tol);
        if (numerics::norm2(t) * inst.norm_J > 0.1) continue;
        const ComplexMatrix s = scattering_matrix(inst, {lambda, y}, 1.0, tol).S;
        bool near_one = true;
        for (const cplx e : numerics::general_eig(s)) near_one = near_one && std::abs(std::arg(e)) <= tol.theta_margin / 2;
        if (near_one) return y;
    }
    throw Error(ErrorCode::RefinementExhausted, "no admissible Y_max found");
}

UnitaryPath y_path(const ValidatedInstance& inst, double lambda, double s, double y_from, double y_to,
                   const ToleranceConfig& tol) {
    if (y_from < 0.0 || y_to < 0.0) throw Error(ErrorCode::InvalidArgument, "y_path requires y >= 0");
    const double y_min = 1e-6 * inst.scale;
    const bool descending = y_to < y_from;
    const double y_top = std::max(y_from, y_to);
    const double y_low = std::min(y_from, y_to);
    auto y_of = [=](double t) {
        const double u = descending ? 1.0 - t : t;
        if (u <= 0.0) return y_low;
        if (u >= 1.0) return y_top;
        return y_low + ramp(u, y_top - y_low, y_min);
    };
    UnitaryPath p;
    p.evaluate = [inst, lambda, s, y_of, tol](double t) {
        return scattering_matrix(inst, {lambda, y_of(t)}, s, tol).S;
    };
    p.parameter = y_of;
    p.description = "y: " + std::to_string(y_from) + " -> " + std::to_string(y_to) + " at s = " + std::to_string(s);
    return p;
}

Trajectory mu_trajectory(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol, FlowOptions opts) {
    require_off_spectrum(inst, lambda, tol);
    require_nonresonant_unit_coupling(inst, lambda, tol);
    const double y_max = choose_y_max(inst, lambda, tol);
    return track_eigenvalues(y_path(inst, lambda, 1.0, 0.0, y_max, tol), opts.initial_samples, tol);
}

FlowResult mu_invariant(const ValidatedInstance& inst, double lambda, double theta, const ToleranceConfig& tol,
                        FlowOptions opts) {
    Trajectory traj = mu_trajectory(inst, lambda, tol, opts);
    const double y_max = traj.param.back();
    FlowResult r = flow_result(std::move(traj), theta, tol);
    r.y_max = y_max;
    return r;
}

Trajectory mu_a_trajectory(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol,
                           FlowOptions opts) {
    require_off_spectrum(inst, lambda, tol);
    require_nonresonant_unit_coupling(inst, lambda, tol);
    const ScatteringContext ctx = scattering_context(inst, {lambda, 0.0}, tol);
    const double eps = kExcisionFraction;  // window [0,1] has unit span
    UnitaryPath p;
    p.evaluate = [ctx, tol](double t) { return scattering_matrix(ctx, 1.0 - t, tol).S; };
    p.parameter = [](double t) { return 1.0 - t; };
    p.description = "s: 1 -> 0 at y = 0";
    for (const double r : real_resonances(inst, lambda, -1.0, 2.0, tol)) {
        const double lo = 1.0 - r - eps, hi = 1.0 - r + eps;
        if (lo > 0.0 && hi < 1.0) p.gaps.emplace_back(lo, hi);
    }
    return track_eigenvalues(p, opts.initial_samples, tol);
}

FlowResult mu_a_invariant(const ValidatedInstance& inst, double lambda, double theta, const ToleranceConfig& tol,
                          FlowOptions opts) {
    return flow_result(mu_a_trajectory(inst, lambda, tol, opts), theta, tol);
}

FlowResult mu_a_contour(const ValidatedInstance& inst, double lambda, double theta, double y0, double rho,
                        const ToleranceConfig& tol, FlowOptions opts) {
    if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "detour radius must be positive");
    const auto points = resonance_points(inst, lambda, 0.0, {0.0, 1.0}, tol);
    std::vector<double> centers;
    // Every group must sit well inside its detour disc, with nothing near the arc.
    const CriticalPoints cp = critical_points(inst, lambda, y0, tol);
    for (const auto& p : points) {
        const cplx r = p.location;
        centers.push_back(r.real());
        int inside = 0;
        for (const auto* set : {&cp.resonances, &cp.anti_resonances}) {
            for (const cplx c : *set) {
                const double d = std::abs(c - r);
                if (d > 0.75 * rho && d < 1.25 * rho)
                    throw Error(ErrorCode::ClusterSeparationFailure, "critical point close to a detour arc");
                if (d <= 0.75 * rho && set == &cp.resonances) ++inside;
            }
        }
        if (inside != p.multiplicity)
            throw Error(ErrorCode::ClusterSeparationFailure,
                        "resonance group does not fit inside the detour radius; reduce y0");
    }
    return composite_flow(inst, lambda, theta, y0, centers, rho, tol, opts);
}

FlowResult mu_rectangle(const ValidatedInstance& inst, double lambda, double theta, double y0,
                        const ToleranceConfig& tol, FlowOptions opts) {
    return composite_flow(inst, lambda, theta, y0, {}, 0.0, tol, opts);
}

std::vector<double> theta_grid(int count, const ToleranceConfig& tol) {
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "theta grid needs at least one angle");
    std::vector<double> out;
    const double span = kTwoPi - 2.0 * tol.theta_margin;
    for (int j = 0; j < count; ++j) out.push_back(tol.theta_margin + (j + 0.5) * span / count);
    return out;
}

SingularFlow singular_flow(const ValidatedInstance& inst, double lambda, std::span<const double> thetas,
                           const ToleranceConfig& tol, FlowOptions opts) {
    if (thetas.size() < 5) throw Error(ErrorCode::InvalidArgument, "mu_singular needs at least 5 angles");
    const Trajectory mu_traj = mu_trajectory(inst, lambda, tol, opts);
    const Trajectory mu_a_traj = mu_a_trajectory(inst, lambda, tol, opts);
    SingularFlow out;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const int m = crossings(mu_traj, thetas[i], tol).mu;
        const int ma = crossings(mu_a_traj, thetas[i], tol).mu;
        out.thetas.push_back(thetas[i]);
        out.mu.push_back(m);
        out.mu_a.push_back(ma);
        if (i > 0 && m - ma != out.mu_s)
            throw Error(ErrorCode::ThetaDependence, "mu - mu_a differs between angles " + std::to_string(thetas[0]) +
                                                        " and " + std::to_string(thetas[i]));
        out.mu_s = m - ma;
    }
    out.mu_flow = flow_result(mu_traj, thetas[0], tol);
    out.mu_flow.y_max = mu_traj.param.back();
    out.mu_a_flow = flow_result(mu_a_traj, thetas[0], tol);
    return out;
}

int mu_singular(const ValidatedInstance& inst, double lambda, std::span<const double> thetas,
                const ToleranceConfig& tol, FlowOptions opts) {
    return singular_flow(inst, lambda, thetas, tol, opts).mu_s;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
    out << "t,param";
    for (std::size_t j = 0; j < trajectory.tracks(); ++j)
        out << ",track" << j << "_re,track" << j << "_im,track" << j << "_phase";
    out << '\n';
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t i = 0; i < trajectory.samples(); ++i) {
        put(trajectory.t[i]);
        out << ',';
        put(trajectory.param[i]);
        for (std::size_t j = 0; j < trajectory.tracks(); ++j) {
            out << ',';
            put(trajectory.eigenvalues[i][j].real());
            out << ',';
            put(trajectory.eigenvalues[i][j].imag());
            out << ',';
            put(trajectory.phases[i][j]);
        }
        out << '\n';
    }
}

}  // namespace resflow
