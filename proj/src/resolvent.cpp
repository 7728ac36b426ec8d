#include "resflow/resolvent.hpp"

#include <string>

#include "resflow/error.hpp"

namespace resflow {

namespace {

ComplexMatrix shifted(const ComplexMatrix& h, cplx z) {
    ComplexMatrix a = h;
    a.diagonal().array() -= z;
    return a;
}

}  // namespace

ComplexMatrix sandwiched_resolvent_at(const ValidatedInstance& inst, double s_base, cplx z,
                                      const ToleranceConfig& tol) {
    const ComplexMatrix h = s_base == 0.0 ? inst.H0() : perturbed_operator(inst.instance, s_base);
    const ComplexMatrix rhs = inst.F().adjoint();
    try {
        const auto sol = numerics::solve(shifted(h, z), rhs, tol.tol_sing);
        return inst.F() * sol.x;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NumericallySingular)
            throw Error(ErrorCode::LambdaInSpectrum, "z is numerically in the spectrum of H_s");
        throw;
    }
}

SandwichedResolvent sandwiched_resolvent(const ValidatedInstance& inst, double s_base, SpectralParameter z,
                                         const ToleranceConfig& tol) {
    if (z.y < 0.0) throw Error(ErrorCode::InvalidArgument, "spectral parameter requires y >= 0");
    if (z.y == 0.0) {
        const ComplexMatrix h = s_base == 0.0 ? inst.H0() : perturbed_operator(inst.instance, s_base);
        double dist = 0.0;
        if (s_base == 0.0) {
            dist = inst.spectral_distance(z.lambda);
        } else {
            const RealVector ev = numerics::herm_eig(h, tol.tol_herm).values;
            dist = (ev.array() - z.lambda).abs().minCoeff();
        }
        const double hnorm = std::max(1.0, numerics::norm2(h));
        if (dist <= 10.0 * tol.tol_sing * hnorm)
            throw Error(ErrorCode::LambdaInSpectrum,
                        "lambda = " + std::to_string(z.lambda) + " lies in spec(H_s), s = " + std::to_string(s_base));
        ComplexMatrix t = sandwiched_resolvent_at(inst, s_base, z.z(), tol);
        return {z, s_base, numerics::hermitian_part(t)};
    }
    return {z, s_base, sandwiched_resolvent_at(inst, s_base, z.z(), tol)};
}

ComplexMatrix im_part(const SandwichedResolvent& t, const ToleranceConfig& tol) {
    const Eigen::Index k = t.T.rows();
    if (t.z.y == 0.0) return ComplexMatrix::Zero(k, k);
    const ComplexMatrix im = numerics::hermitian_part((t.T - t.T.adjoint()) / cplx(0.0, 2.0));
    const RealVector ev = numerics::herm_eig(im, 1e-8).values;
    const double scale = numerics::norm2(t.T);
    if (ev.size() > 0 && ev(0) < -tol.tol_psd * scale)
        throw Error(ErrorCode::NotPositiveSemidefinite, "Im T_z has a negative eigenvalue for y > 0");
    return im;
}

std::vector<double> t_norm_decay(const ValidatedInstance& inst, double lambda, std::span<const double> ys,
                                 const ToleranceConfig& tol) {
    std::vector<double> out;
    out.reserve(ys.size());
    for (const double y : ys) {
        if (!(y > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_norm_decay requires positive y");
        out.push_back(numerics::norm2(sandwiched_resolvent_at(inst, 0.0, {lambda, y}, tol)));
    }
    return out;
}

ComplexMatrix resolvent_product(const ValidatedInstance& inst, cplx z, cplx w) {
    const ComplexMatrix rhs = inst.F().adjoint();
    const ComplexMatrix rw = numerics::solve(shifted(inst.H0(), w), rhs).x;
    const ComplexMatrix rzw = numerics::solve(shifted(inst.H0(), z), rw).x;
    return inst.F() * rzw;
}

}  // namespace resflow
