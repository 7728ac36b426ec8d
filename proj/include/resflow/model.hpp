#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "resflow/numerics.hpp"

namespace resflow {

/// Central tolerance set. Every numerical threshold used above the dense
/// substrate is read from here.
struct ToleranceConfig {
    double tol_herm = 1e-10;
    double tol_psd = 1e-10;
    double tol_sing = 1e-12;
    double tol_real = 1e-8;        // relative realness test for eigenvalues
    double tol_unitary = 1e-8;
    double tol_critical = 1e-8;    // relative sigma_min threshold for resonant / anti-resonant classification
    double cluster_factor = 0.25;
    double max_step_phase = 0.2;   // radians
    int min_contour_samples = 64;
    int max_adaptive_depth = 20;
    double theta_margin = 0.1;     // radians

    /// Throws InvalidArgument if any field is out of range.
    void validate() const;
};

/// Interval of coupling constants.
struct CouplingWindow {
    double a = 0.0;
    double b = 1.0;

    double span() const { return b - a; }
    bool contains(double s) const { return s >= a && s <= b; }
};

/// Energy parameter z = lambda + i y with y >= 0.
struct SpectralParameter {
    double lambda = 0.0;
    double y = 0.0;

    cplx z() const { return {lambda, y}; }
    bool on_boundary() const { return y == 0.0; }
};

/// Finite-dimensional model of (H0, F, J): H0 on C^n, F : C^n -> C^k, J on C^k,
/// with perturbation V = F* J F.
struct Instance {
    ComplexMatrix H0;
    ComplexMatrix F;
    ComplexMatrix J;

    Eigen::Index n() const { return H0.rows(); }
    Eigen::Index k() const { return F.rows(); }
};

/// An instance whose Hermitian invariants have been checked, together with
/// the sorted spectrum of H0. In finite dimension the limiting-absorption
/// conditions hold automatically at every lambda off spec(H0).
struct ValidatedInstance {
    Instance instance;
    RealVector spectrum;       // ascending eigenvalues of H0
    double scale = 1.0;        // max(1, ||H0||, ||V||)
    double norm_F = 0.0;
    double norm_J = 0.0;
    bool boundary_values_exist = true;

    const ComplexMatrix& H0() const { return instance.H0; }
    const ComplexMatrix& F() const { return instance.F; }
    const ComplexMatrix& J() const { return instance.J; }
    Eigen::Index n() const { return instance.n(); }
    Eigen::Index k() const { return instance.k(); }

    /// Distance from lambda to spec(H0).
    double spectral_distance(double lambda) const;
};

ValidatedInstance validate_instance(const Instance& inst, const ToleranceConfig& tol = {});

/// Seeded random instance: H0 Hermitized complex Gaussian, F complex
/// Gaussian, J = diag(signature). Bit-reproducible for fixed arguments.
Instance random_instance(int n, int k, std::span<const int> signature, std::uint64_t seed);

/// `count` energies strictly inside the gaps of spec(H0), plus below its
/// minimum and above its maximum, each at distance >= 10 * tol_sing * scale.
std::vector<double> lambda_grid(const ValidatedInstance& inst, int count, const ToleranceConfig& tol = {});

/// V = F* J F.
ComplexMatrix perturbation(const Instance& inst);

/// H_s = H0 + s V.
ComplexMatrix perturbed_operator(const Instance& inst, double s);

/// Throws LambdaInSpectrum if lambda is within 10 * tol_sing * scale of spec(H0).
void require_off_spectrum(const ValidatedInstance& inst, double lambda, const ToleranceConfig& tol = {});

}  // namespace resflow
