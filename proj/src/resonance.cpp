#include "resflow/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "resflow/contour.hpp"
#include "resflow/error.hpp"

namespace resflow {

namespace {

constexpr double kClusterRel = 1e-6;
constexpr double kEndpointTol = 1e-8;

struct SigmaCluster {
    cplx mean;
    int count = 0;
};

std::vector<SigmaCluster> cluster_sigmas(std::vector<cplx> sig) {
    std::sort(sig.begin(), sig.end(), [](cplx a, cplx b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    std::vector<SigmaCluster> out;
    std::vector<char> used(sig.size(), 0);
    for (std::size_t i = 0; i < sig.size(); ++i) {
        if (used[i]) continue;
        cplx sum = sig[i];
        int count = 1;
        used[i] = 1;
        for (std::size_t j = i + 1; j < sig.size(); ++j) {
            if (used[j]) continue;
            const double scale = std::max(std::abs(sig[i]), std::abs(sig[j]));
            if (std::abs(sig[j] - sig[i]) <= kClusterRel * scale) {
                sum += sig[j];
                ++count;
                used[j] = 1;
            }
        }
        out.push_back({sum / static_cast<double>(count), count});
    }
    return out;
}

ComplexMatrix boundary_resolvent(const ValidatedInstance& inst, double lambda, double s_base,
                                 const ToleranceConfig& tol) {
    require_off_spectrum(inst, lambda, tol);
    try {
        return sandwiched_resolvent(inst, s_base, {lambda, 0.0}, tol).T;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::LambdaInSpectrum && s_base != 0.0)
            throw Error(ErrorCode::BasePointResonant,
                        "base coupling s = " + std::to_string(s_base) + " is a resonance point");
        throw;
    }
}

std::vector<cplx> nonzero_sigmas(const ComplexMatrix& t, const ComplexMatrix& j) {
    const std::vector<cplx> ev = numerics::general_eig(t * j);
    const double floor = 1e-13 * std::max(numerics::norm2(t) * numerics::norm2(j), 1e-300);
    std::vector<cplx> out;
    for (const cplx s : ev)
        if (std::abs(s) > floor) out.push_back(s);
    return out;
}

struct GroupCounts {
    bool valid = false;
    int n_plus = 0;
    int n_minus = 0;
    std::vector<cplx> members;
};

GroupCounts count_group(const ValidatedInstance& inst, double lambda, const ResonancePoint& point, double y,
                        const ToleranceConfig& tol) {
    GroupCounts g;
    try {
        g.members = resonance_group(inst, lambda, point, y, tol);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ClusterSeparationFailure) return g;
        throw;
    }
    for (const cplx r : g.members) {
        if (std::abs(r.imag()) <= 10.0 * tol.tol_real * std::abs(r)) return g;
        (r.imag() > 0 ? g.n_plus : g.n_minus)++;
    }
    g.valid = true;
    return g;
}

}  // namespace

std::vector<cplx> resonance_locations(const ValidatedInstance& inst, cplx z, double s_base,
                                      const ToleranceConfig& tol) {
    const ComplexMatrix t = z.imag() == 0.0 ? boundary_resolvent(inst, z.real(), s_base, tol)
                                            : sandwiched_resolvent_at(inst, s_base, z, tol);
    std::vector<cplx> out;
    for (const cplx s : nonzero_sigmas(t, inst.J())) out.push_back(s_base - 1.0 / s);
    return out;
}

std::vector<ResonancePoint> resonance_points(const ValidatedInstance& inst, double lambda, double s_base,
                                             CouplingWindow window, const ToleranceConfig& tol) {
    if (!(window.a < window.b)) throw Error(ErrorCode::InvalidArgument, "coupling window requires a < b");
    const ComplexMatrix t = boundary_resolvent(inst, lambda, s_base, tol);
    const auto clusters = cluster_sigmas(nonzero_sigmas(t, inst.J()));

    std::vector<cplx> all;
    for (const auto& c : clusters) all.push_back(s_base - 1.0 / c.mean);

    std::vector<ResonancePoint> out;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const cplx sigma = clusters[i].mean;
        if (std::abs(sigma.imag()) > tol.tol_real * std::abs(sigma)) continue;
        const double r = all[i].real();
        if (r < window.a - kEndpointTol || r > window.b + kEndpointTol) continue;

        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < all.size(); ++j)
            if (j != i) nearest = std::min(nearest, std::abs(all[j] - cplx(r, 0.0)));

        ResonancePoint p;
        p.location = {r, 0.0};
        p.multiplicity = clusters[i].count;
        p.group_id = static_cast<int>(out.size());
        p.base_y = 0.0;
        p.s_base = s_base;
        p.cluster_radius =
            tol.cluster_factor * std::min({nearest, std::abs(r - window.a), std::abs(window.b - r)});

        // Independent multiplicity: zeros of det(1 + (s - s_base) T J) enclosed by a small circle.
        const double radius =
            std::isfinite(nearest) ? 0.4 * nearest : 0.25 * std::max(1.0, std::abs(r - s_base));
        try {
            const auto w = det_winding(
                [&](cplx s) { return coupling_operator(t, inst.J(), s - s_base); },
                Contour{{r, 0.0}, radius, tol.min_contour_samples}, tol);
            p.contour_multiplicity = w.winding;
        } catch (const Error&) {
            p.contour_multiplicity = 0;
        }
        out.push_back(p);
    }
    std::sort(out.begin(), out.end(),
              [](const ResonancePoint& x, const ResonancePoint& y) { return x.location.real() < y.location.real(); });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].group_id = static_cast<int>(i);
    return out;
}

std::vector<cplx> resonance_group(const ValidatedInstance& inst, double lambda, const ResonancePoint& point, double y,
                                  const ToleranceConfig& tol) {
    if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "resonance_group requires y > 0");
    const std::vector<cplx> locs = resonance_locations(inst, {lambda, y}, point.s_base, tol);
    std::vector<cplx> members;
    for (const cplx r : locs)
        if (std::abs(r - point.location) <= point.cluster_radius) members.push_back(r);
    if (static_cast<int>(members.size()) != point.multiplicity) {
        throw Error(ErrorCode::ClusterSeparationFailure,
                    std::to_string(members.size()) + " shifted points within the cluster radius, expected " +
                        std::to_string(point.multiplicity) + " (reduce y)");
    }
    std::sort(members.begin(), members.end(), [](cplx a, cplx b) {
        return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
    });
    return members;
}

PointIndex resonance_index(const ValidatedInstance& inst, double lambda, const ResonancePoint& point,
                           const ToleranceConfig& tol) {
    if (!(point.cluster_radius > 0.0))
        throw Error(ErrorCode::ClusterSeparationFailure, "resonance point has no admissible cluster radius");
    double y = std::min(0.01, 0.1 * point.cluster_radius);
    GroupCounts prev;
    double prev_y = 0.0;
    for (int depth = 0; depth <= tol.max_adaptive_depth; ++depth, y *= 0.5) {
        GroupCounts cur = count_group(inst, lambda, point, y, tol);
        if (cur.valid && prev.valid) {
            if (cur.n_plus != prev.n_plus || cur.n_minus != prev.n_minus) {
                throw Error(ErrorCode::UnstableIndex,
                            "group half-plane counts changed between y = " + std::to_string(prev_y) +
                                " and y = " + std::to_string(y));
            }
            PointIndex out;
            out.location = point.location.real();
            out.multiplicity = point.multiplicity;
            out.n_plus = prev.n_plus;
            out.n_minus = prev.n_minus;
            out.index = prev.n_plus - prev.n_minus;
            out.y_used = prev_y;
            out.cluster_radius = point.cluster_radius;
            out.group = std::move(prev.members);
            return out;
        }
        prev = std::move(cur);
        prev_y = y;
    }
    throw Error(ErrorCode::ClusterSeparationFailure,
                "group of r = " + std::to_string(point.location.real()) + " did not separate after " +
                    std::to_string(tol.max_adaptive_depth) + " halvings of y");
}

IndexReport total_resonance_index(const ValidatedInstance& inst, double lambda, CouplingWindow window,
                                  const ToleranceConfig& tol) {
    const auto points = resonance_points(inst, lambda, 0.0, window, tol);
    IndexReport rep;
    for (const auto& p : points) {
        const double r = p.location.real();
        if (std::abs(r - window.a) <= kEndpointTol || std::abs(r - window.b) <= kEndpointTol)
            throw Error(ErrorCode::ResonantEndpoint,
                        "resonance point " + std::to_string(r) + " coincides with a window endpoint");
    }
    for (const auto& p : points) {
        rep.points.push_back(resonance_index(inst, lambda, p, tol));
        rep.total += rep.points.back().index;
    }
    return rep;
}

bool base_independence_check(const ValidatedInstance& inst, double lambda, CouplingWindow window,
                             std::span<const double> s_bases, const ToleranceConfig& tol) {
    std::vector<std::vector<ResonancePoint>> sets;
    for (const double b : s_bases) sets.push_back(resonance_points(inst, lambda, b, window, tol));
    for (std::size_t i = 1; i < sets.size(); ++i) {
        if (sets[i].size() != sets[0].size()) return false;
        for (std::size_t j = 0; j < sets[0].size(); ++j) {
            const double a = sets[0][j].location.real();
            const double b = sets[i][j].location.real();
            if (std::abs(a - b) > 1e-6 * std::max(1.0, std::abs(a))) return false;
            if (sets[0][j].multiplicity != sets[i][j].multiplicity) return false;
        }
    }
    return true;
}

CrossingReport crossing_oracle(const ValidatedInstance& inst, double lambda, CouplingWindow window, int grid_size,
                               const ToleranceConfig& tol) {
    if (grid_size < 1) throw Error(ErrorCode::InvalidArgument, "crossing_oracle grid_size must be >= 1");
    const double guard = 10.0 * tol.tol_sing * inst.scale;
    auto count_below = [&](double s, bool check) {
        const RealVector ev = numerics::herm_eig(perturbed_operator(inst.instance, s), tol.tol_herm).values;
        if (check && (ev.array() - lambda).abs().minCoeff() <= guard)
            throw Error(ErrorCode::CrossingAtEndpoint,
                        "an eigenvalue of H_s sits at lambda for s = " + std::to_string(s));
        return static_cast<int>((ev.array() < lambda).count());
    };

    CrossingReport rep;
    const int c_a = count_below(window.a, true);
    const int c_b = count_below(window.b, true);
    int prev = c_a;
    double prev_s = window.a;
    for (int i = 1; i <= grid_size; ++i) {
        const double s = i == grid_size ? window.b : window.a + window.span() * i / grid_size;
        const int cur = i == grid_size ? c_b : count_below(s, false);
        if (cur != prev) {
            double lo = prev_s, hi = s;
            for (int it = 0; it < 60 && hi - lo > 1e-13 * std::max(1.0, window.span()); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (count_below(mid, false) != prev) hi = mid;
                else lo = mid;
            }
            const int delta = prev - cur;  // upward crossings reduce the count below lambda
            for (int m = 0; m < std::abs(delta); ++m) {
                rep.locations.push_back(0.5 * (lo + hi));
                rep.directions.push_back(delta > 0 ? 1 : -1);
            }
        }
        prev = cur;
        prev_s = s;
    }
    rep.net = c_a - c_b;
    return rep;
}

}  // namespace resflow
