#include "resflow/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "resflow/error.hpp"
#include "resflow/flow.hpp"

namespace resflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double a) {
    a = std::remainder(a, kTwoPi);
    if (a <= -std::numbers::pi) a += kTwoPi;
    return a;
}

class WindingIntegrator {
public:
    WindingIntegrator(const MatrixFunction& f, const Contour& c, const ToleranceConfig& tol)
        : f_(f), contour_(c), tol_(tol) {}

    cplx sample(double angle) {
        const cplx d = numerics::det(f_(contour_.point(angle)));
        ++evaluations_;
        scale_ = std::max(scale_, std::abs(d));
        check(d, angle);
        return d;
    }

    void check(cplx d, double angle) const {
        if (d == 0.0 || !(std::abs(d) >= 1e-12 * scale_) || !std::isfinite(std::abs(d)))
            throw Error(ErrorCode::ZeroOnContour, "det f vanishes on the contour at angle " + std::to_string(angle));
    }

    double step(double a0, cplx d0, double a1, cplx d1, int depth) {
        const double delta = wrap(std::arg(d1 / d0));
        if (std::abs(delta) <= std::numbers::pi / 2) return delta;
        if (depth >= tol_.max_adaptive_depth)
            throw Error(ErrorCode::RefinementExhausted, "det winding step unresolved after maximal bisection");
        max_depth_ = std::max(max_depth_, depth + 1);
        const double am = 0.5 * (a0 + a1);
        const cplx dm = sample(am);
        return step(a0, d0, am, dm, depth + 1) + step(am, dm, a1, d1, depth + 1);
    }

    int evaluations() const { return evaluations_; }
    int max_depth() const { return max_depth_; }

private:
    const MatrixFunction& f_;
    Contour contour_;
    ToleranceConfig tol_;
    double scale_ = 0.0;
    int evaluations_ = 0;
    int max_depth_ = 0;
};

std::vector<cplx> nonzero_inverse_points(const ComplexMatrix& tj) {
    std::vector<cplx> out;
    const double floor = 1e-13 * std::max(numerics::norm2(tj), 1e-300);
    for (const cplx s : numerics::general_eig(tj))
        if (std::abs(s) > floor) out.push_back(-1.0 / s);
    return out;
}

std::vector<cplx> cluster_points(const std::vector<cplx>& pts) {
    std::vector<cplx> centers;
    for (const cplx p : pts) {
        bool merged = false;
        for (const cplx c : centers)
            if (std::abs(p - c) <= 1e-6 * std::max(1.0, std::abs(c))) merged = true;
        if (!merged) centers.push_back(p);
    }
    return centers;
}

}  // namespace

WindingResult det_winding(const MatrixFunction& f, const Contour& contour, const ToleranceConfig& tol) {
    if (!(contour.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "contour radius must be positive");
    const int n = std::max(contour.samples, tol.min_contour_samples);
    WindingIntegrator integ(f, contour, tol);
    std::vector<cplx> dets(n);
    for (int i = 0; i < n; ++i) dets[i] = integ.sample(kTwoPi * i / n);
    // Early samples were judged against a smaller running maximum.
    for (int i = 0; i < n; ++i) integ.check(dets[i], kTwoPi * i / n);
    double raw = 0.0;
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        raw += integ.step(kTwoPi * i / n, dets[i], kTwoPi * (i + 1) / n, dets[j], 0);
    }
    WindingResult out;
    out.raw_phase_change = raw;
    out.winding = static_cast<int>(std::lround(raw / kTwoPi));
    out.refinement_depth = integ.max_depth();
    out.evaluations = integ.evaluations();
    if (std::abs(raw - kTwoPi * out.winding) > 1e-6 * (1 + std::abs(out.winding)))
        throw Error(ErrorCode::RefinementExhausted, "closed-contour phase change is not a multiple of 2pi");
    return out;
}

WindingResult sampled_winding(std::span<const cplx> values) {
    WindingResult out;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        if (values[i] == 0.0 || values[i + 1] == 0.0)
            throw Error(ErrorCode::ZeroOnContour, "zero value in sampled winding");
        out.raw_phase_change += wrap(std::arg(values[i + 1] / values[i]));
    }
    out.winding = static_cast<int>(std::lround(out.raw_phase_change / kTwoPi));
    out.evaluations = static_cast<int>(values.size());
    return out;
}

CriticalPoints critical_points(const ValidatedInstance& inst, double lambda, double y, const ToleranceConfig& tol) {
    CriticalPoints cp;
    if (y == 0.0) {
        cp.resonances = resonance_locations(inst, {lambda, 0.0}, 0.0, tol);
        cp.anti_resonances = cp.resonances;
        return cp;
    }
    const ComplexMatrix t = sandwiched_resolvent_at(inst, 0.0, {lambda, y}, tol);
    cp.resonances = nonzero_inverse_points(t * inst.J());
    cp.anti_resonances = nonzero_inverse_points(t.adjoint() * inst.J());
    return cp;
}

void certify_contour(const ValidatedInstance& inst, double lambda, double y, const Contour& contour, bool include_anti,
                     const ToleranceConfig& tol) {
    const CriticalPoints cp = critical_points(inst, lambda, y, tol);
    auto check_set = [&](const std::vector<cplx>& pts, const char* what) {
        for (const cplx p : pts) {
            const double d = std::abs(p - contour.center);
            if (d >= 0.5 * contour.radius && d <= 1.5 * contour.radius)
                throw Error(ErrorCode::CriticalPointNearContour,
                            std::string(what) + " point within the certified annulus of the contour");
        }
    };
    check_set(cp.resonances, "resonance");
    if (include_anti && y > 0.0) check_set(cp.anti_resonances, "anti-resonance");

    const ComplexMatrix t = y == 0.0 ? sandwiched_resolvent(inst, 0.0, {lambda, 0.0}, tol).T
                                     : sandwiched_resolvent_at(inst, 0.0, {lambda, y}, tol);
    const int n = std::max(contour.samples, tol.min_contour_samples);
    for (int i = 0; i < n; ++i) {
        const cplx s = contour.point(kTwoPi * i / n);
        const ComplexMatrix a = coupling_operator(t, inst.J(), s);
        if (numerics::sigma_min(a) <= 1e-6 * numerics::norm2(a))
            throw Error(ErrorCode::CriticalPointNearContour, "1 + sTJ nearly singular on the contour");
        if (include_anti) {
            const ComplexMatrix b = coupling_operator(t.adjoint(), inst.J(), s);
            if (numerics::sigma_min(b) <= 1e-6 * numerics::norm2(b))
                throw Error(ErrorCode::CriticalPointNearContour, "1 + sT*J nearly singular on the contour");
        }
    }
}

int resonance_multiplicity_contour(const ValidatedInstance& inst, double lambda, double y, cplx center, double radius,
                                   const ToleranceConfig& tol) {
    const Contour c{center, radius, tol.min_contour_samples};
    certify_contour(inst, lambda, y, c, false, tol);
    const ComplexMatrix t = y == 0.0 ? sandwiched_resolvent(inst, 0.0, {lambda, 0.0}, tol).T
                                     : sandwiched_resolvent_at(inst, 0.0, {lambda, y}, tol);
    const ComplexMatrix j = inst.J();
    return det_winding([&](cplx s) { return coupling_operator(t, j, s); }, c, tol).winding;
}

int s_index(const ValidatedInstance& inst, double lambda, double y, cplx center, double radius,
            const ToleranceConfig& tol) {
    if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "s_index requires y > 0");
    const Contour c{center, radius, tol.min_contour_samples};
    certify_contour(inst, lambda, y, c, true, tol);
    const ScatteringContext ctx = scattering_context(inst, {lambda, y}, tol);
    return det_winding([&](cplx s) { return scattering_matrix(ctx, s, tol).S; }, c, tol).winding;
}

int group_s_index(const ValidatedInstance& inst, double lambda, const ResonancePoint& point, double y,
                  const ToleranceConfig& tol) {
    for (const double jitter : {1.0, 1.2, 0.8, 1.44, 0.64}) {
        const double yj = y * jitter;
        const std::vector<cplx> members = resonance_group(inst, lambda, point, yj, tol);
        const CriticalPoints cp = critical_points(inst, lambda, yj, tol);

        bool collision = false;
        for (const cplx r : cp.resonances)
            for (const cplx a : cp.anti_resonances)
                if (std::abs(r - a) <= 2.0 * tol.tol_critical * std::max(1.0, std::abs(r))) collision = true;
        if (collision) continue;

        // Upper half-plane critical points of the group: resonance members
        // above the axis, and conjugates (anti-resonances) of those below.
        std::vector<cplx> upper;
        for (const cplx r : members) upper.push_back(r.imag() > 0.0 ? r : std::conj(r));
        const std::vector<cplx> centers = cluster_points(upper);

        std::vector<cplx> all = cp.resonances;
        all.insert(all.end(), cp.anti_resonances.begin(), cp.anti_resonances.end());
        int anticlockwise = 0;
        for (const cplx c : centers) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const cplx p : all) {
                const double d = std::abs(p - c);
                if (d > 1e-6 * std::max(1.0, std::abs(c))) nearest = std::min(nearest, d);
            }
            anticlockwise += s_index(inst, lambda, yj, c, 0.4 * nearest, tol);
        }
        // Clockwise orientation.
        return -anticlockwise;
    }
    throw Error(ErrorCode::CollisionDetected, "resonance and anti-resonance points collide for every jittered y");
}

ContourTracking track_contour(const ValidatedInstance& inst, double lambda, double y, const Contour& contour,
                              const ToleranceConfig& tol) {
    certify_contour(inst, lambda, y, contour, true, tol);
    const ScatteringContext ctx = scattering_context(inst, {lambda, y}, tol);
    UnitaryPath path;
    path.evaluate = [ctx, contour, tol](double t) { return scattering_matrix(ctx, contour.point(kTwoPi * t), tol).S; };
    path.parameter = [](double t) { return kTwoPi * t; };
    path.description = "contour loop";
    path.unitary = false;
    const Trajectory traj = track_eigenvalues(path, std::max(contour.samples, tol.min_contour_samples) + 1, tol);

    ContourTracking out;
    const auto& first = traj.eigenvalues.front();
    const auto& last = traj.eigenvalues.back();
    const std::size_t k = first.size();
    Eigen::MatrixXd cost(k, k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < k; ++i) cost(j, i) = std::abs(last[j] - first[i]);
    out.permutation = numerics::optimal_assignment(cost);
    for (std::size_t j = 0; j < k; ++j) {
        const double w = (traj.phases.back()[j] - traj.phases.front()[j]) / kTwoPi;
        out.track_windings.push_back(w);
        out.total_winding += w;
    }
    std::vector<char> seen(k, 0);
    for (std::size_t j = 0; j < k; ++j) {
        if (seen[j]) continue;
        std::vector<int> cycle;
        double w = 0.0;
        for (std::size_t cur = j; !seen[cur]; cur = static_cast<std::size_t>(out.permutation[cur])) {
            seen[cur] = 1;
            cycle.push_back(static_cast<int>(cur));
            w += out.track_windings[cur];
        }
        out.cycles.push_back(std::move(cycle));
        out.cycle_windings.push_back(w);
    }
    return out;
}

}  // namespace resflow
