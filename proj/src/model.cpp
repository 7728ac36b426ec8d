#include "resflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "resflow/error.hpp"

namespace resflow {

void ToleranceConfig::validate() const {
    const bool ok = tol_herm > 0 && tol_psd > 0 && tol_sing > 0 && tol_real > 0 && tol_unitary > 0 &&
                    tol_critical > 0 && cluster_factor > 0 && cluster_factor < 0.5 && max_step_phase > 0 &&
                    min_contour_samples > 0 && max_adaptive_depth > 0 && theta_margin > 0 &&
                    theta_margin < std::numbers::pi / 2;
    if (!ok) throw Error(ErrorCode::InvalidArgument, "tolerance configuration out of range");
}

double ValidatedInstance::spectral_distance(double lambda) const {
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) d = std::min(d, std::abs(lambda - spectrum(i)));
    return d;
}

ComplexMatrix perturbation(const Instance& inst) {
    return inst.F.adjoint() * inst.J * inst.F;
}

ComplexMatrix perturbed_operator(const Instance& inst, double s) {
    return numerics::hermitian_part(inst.H0 + s * perturbation(inst));
}

ValidatedInstance validate_instance(const Instance& inst, const ToleranceConfig& tol) {
    numerics::require_finite(inst.H0, "H0");
    numerics::require_finite(inst.F, "F");
    numerics::require_finite(inst.J, "J");
    if (inst.H0.rows() != inst.H0.cols())
        throw Error(ErrorCode::DimensionMismatch, "H0 must be square");
    if (inst.J.rows() != inst.J.cols())
        throw Error(ErrorCode::DimensionMismatch, "J must be square");
    if (inst.F.cols() != inst.H0.rows())
        throw Error(ErrorCode::DimensionMismatch, "F must have n columns");
    if (inst.F.rows() != inst.J.rows())
        throw Error(ErrorCode::DimensionMismatch, "F must have k rows");
    numerics::require_hermitian(inst.H0, "H0", tol.tol_herm);
    numerics::require_hermitian(inst.J, "J", tol.tol_herm);
    const ComplexMatrix v = perturbation(inst);
    numerics::require_hermitian(v, "V = F*JF", tol.tol_herm);

    ValidatedInstance out;
    out.instance = inst;
    out.instance.H0 = numerics::hermitian_part(inst.H0);
    out.instance.J = numerics::hermitian_part(inst.J);
    out.spectrum = numerics::herm_eig(out.instance.H0, tol.tol_herm).values;
    out.norm_F = numerics::norm2(inst.F);
    out.norm_J = numerics::norm2(inst.J);
    out.scale = std::max({1.0, numerics::norm2(inst.H0), numerics::norm2(v)});
    out.boundary_values_exist = true;
    return out;
}

void require_off_spectrum(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol) {
    if (inst.spectral_distance(lambda) <= 10.0 * tol.tol_sing * inst.scale)
        throw Error(ErrorCode::LambdaInSpectrum, "lambda = " + std::to_string(lambda) + " lies in spec(H0)");
}

namespace {

// Box-Muller on raw mt19937_64 output: the engine's sequence is fixed by the
// standard, std::normal_distribution is not.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Standard complex Gaussian: E|w|^2 = 1.
    cplx complex_normal() {
        const double re = normal() * std::numbers::sqrt2 / 2.0;
        const double im = normal() * std::numbers::sqrt2 / 2.0;
        return {re, im};
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace

Instance random_instance(int n, int k, std::span<const int> signature, std::uint64_t seed) {
    if (k < 1 || n < k || n > 32)
        throw Error(ErrorCode::InvalidArgument, "random_instance requires 1 <= k <= n <= 32");
    if (static_cast<int>(signature.size()) != k)
        throw Error(ErrorCode::DimensionMismatch, "signature length must equal k");
    GaussianSource rng(seed);
    ComplexMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.complex_normal();
    ComplexMatrix f(k, n);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) f(i, j) = rng.complex_normal();
    ComplexMatrix jm = ComplexMatrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        if (signature[i] != 1 && signature[i] != -1)
            throw Error(ErrorCode::InvalidArgument, "signature entries must be +1 or -1");
        jm(i, i) = static_cast<double>(signature[i]);
    }
    return {numerics::hermitian_part(a), f, jm};
}

std::vector<double> lambda_grid(const ValidatedInstance& inst, int count, const ToleranceConfig& tol) {
    if (count < 1) throw Error(ErrorCode::InvalidArgument, "lambda_grid count must be >= 1");
    const double min_dist = 10.0 * tol.tol_sing * inst.scale;

    // Distinct eigenvalues, merged when closer than the admissible gap.
    std::vector<double> eigs;
    for (Eigen::Index i = 0; i < inst.spectrum.size(); ++i) {
        const double e = inst.spectrum(i);
        if (eigs.empty() || e - eigs.back() > 2.0 * min_dist) eigs.push_back(e);
    }
    const double spread = eigs.back() - eigs.front();
    const double outer = eigs.size() > 1 ? std::max(spread / static_cast<double>(eigs.size() - 1), 1e-3) : 1.0;

    // Intervals: (-inf side), every gap, (+inf side). Each contributes points
    // at evenly spaced interior fractions.
    struct Interval {
        double lo, hi;
    };
    std::vector<Interval> intervals;
    intervals.push_back({eigs.front() - 2.0 * outer, eigs.front()});
    for (std::size_t i = 0; i + 1 < eigs.size(); ++i) intervals.push_back({eigs[i], eigs[i + 1]});
    intervals.push_back({eigs.back(), eigs.back() + 2.0 * outer});

    const int m = static_cast<int>(intervals.size());
    const int per = (count + m - 1) / m;
    std::vector<double> candidates;
    for (int q = 1; q <= per; ++q) {
        for (const auto& iv : intervals) {
            const double frac = per == 1 ? 0.5 : static_cast<double>(q) / static_cast<double>(per + 1);
            candidates.push_back(iv.lo + frac * (iv.hi - iv.lo));
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                    [&](double l) { return inst.spectral_distance(l) < min_dist; }),
                     candidates.end());

    std::vector<double> out;
    const int c = static_cast<int>(candidates.size());
    if (count >= c) return candidates;
    if (count == 1) return {candidates[c / 2]};
    for (int i = 0; i < count; ++i) {
        const int idx = static_cast<int>(std::lround(static_cast<double>(i) * (c - 1) / (count - 1)));
        out.push_back(candidates[idx]);
    }
    return out;
}

}  // namespace resflow
