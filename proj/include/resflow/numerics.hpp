#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace resflow {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace numerics {

/// Default relative tolerances of the dense substrate. The model-level
/// ToleranceConfig carries the same defaults and may override them.
inline constexpr double kTolHerm = 1e-10;
inline constexpr double kTolPsd = 1e-10;
inline constexpr double kTolSing = 1e-12;

struct HermitianEigen {
    RealVector values;      // ascending
    ComplexMatrix vectors;  // columns are orthonormal eigenvectors
};

struct LinearSolution {
    ComplexMatrix x;
    double rcond = 0.0;      // sigma_min / sigma_max of the system matrix
    double sigma_min = 0.0;
};

/// Spectral norm (largest singular value). Zero for empty matrices.
double norm2(const ComplexMatrix& a);

/// Smallest singular value of a square matrix.
double sigma_min(const ComplexMatrix& a);

/// True when ||A - A*|| <= tol * ||A||, measured in the spectral norm.
bool is_hermitian(const ComplexMatrix& a, double tol = kTolHerm);

/// Throws NonHermitianInput naming `what` when the check above fails.
void require_hermitian(const ComplexMatrix& a, const char* what, double tol = kTolHerm);

/// Throws InvalidArgument on NaN/Inf or empty matrices.
void require_finite(const ComplexMatrix& a, const char* what);

/// (A + A*) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& a);

HermitianEigen herm_eig(const ComplexMatrix& a, double tol_herm = kTolHerm);

/// Eigenvalues of a general square matrix, as a multiset (order unspecified).
std::vector<cplx> general_eig(const ComplexMatrix& a);

/// Solves A X = B. Throws NumericallySingular when sigma_min(A) <= tol_sing * ||A||.
LinearSolution solve(const ComplexMatrix& a, const ComplexMatrix& b, double tol_sing = kTolSing);

cplx det(const ComplexMatrix& a);

/// Principal square root of a PSD Hermitian matrix. Eigenvalues in
/// [-tol_psd * ||A||, 0] are clamped to zero; anything more negative throws
/// NotPositiveSemidefinite.
ComplexMatrix psd_sqrt(const ComplexMatrix& a, double tol_psd = kTolPsd);

/// Orthogonal projector onto the span of eigenvectors of a Hermitian PSD
/// matrix with eigenvalue above rank_tol * ||A||.
ComplexMatrix range_projector(const ComplexMatrix& a, double rank_tol);

/// Minimum-cost perfect assignment for a square cost matrix: result[i] is the
/// column assigned to row i. Exhaustive search (lexicographic, so the
/// identity wins ties) up to 6x6, Hungarian algorithm above.
std::vector<int> optimal_assignment(const Eigen::MatrixXd& cost);

/// Total distance of the optimal pairing between two equal-size multisets.
double multiset_distance(std::span<const cplx> a, std::span<const cplx> b);

/// Largest pair distance within the optimal pairing.
double multiset_max_deviation(std::span<const cplx> a, std::span<const cplx> b);

}  // namespace numerics
}  // namespace resflow
