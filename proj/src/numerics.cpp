#include "resflow/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "resflow/error.hpp"

namespace resflow {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonHermitianInput: return "NonHermitianInput";
        case ErrorCode::NumericallySingular: return "NumericallySingular";
        case ErrorCode::NotPositiveSemidefinite: return "NotPositiveSemidefinite";
        case ErrorCode::LambdaInSpectrum: return "LambdaInSpectrum";
        case ErrorCode::ResonantParameter: return "ResonantParameter";
        case ErrorCode::BasePointResonant: return "BasePointResonant";
        case ErrorCode::ResonantEndpoint: return "ResonantEndpoint";
        case ErrorCode::ClusterSeparationFailure: return "ClusterSeparationFailure";
        case ErrorCode::UnstableIndex: return "UnstableIndex";
        case ErrorCode::CrossingAtEndpoint: return "CrossingAtEndpoint";
        case ErrorCode::MatchingAmbiguous: return "MatchingAmbiguous";
        case ErrorCode::PhaseOnTarget: return "PhaseOnTarget";
        case ErrorCode::GapTooWide: return "GapTooWide";
        case ErrorCode::ThetaDependence: return "ThetaDependence";
        case ErrorCode::ZeroOnContour: return "ZeroOnContour";
        case ErrorCode::RefinementExhausted: return "RefinementExhausted";
        case ErrorCode::CriticalPointNearContour: return "CriticalPointNearContour";
        case ErrorCode::CollisionDetected: return "CollisionDetected";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

namespace numerics {

namespace {

void require_square(const ComplexMatrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(what) + " must be square, got " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()));
    }
}

std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    // Classic potentials formulation, 1-based internally.
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> result(n, 0);
    for (int j = 1; j <= n; ++j) result[p[j] - 1] = j - 1;
    return result;
}

Eigen::MatrixXd distance_matrix(std::span<const cplx> a, std::span<const cplx> b) {
    Eigen::MatrixXd d(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) d(i, j) = std::abs(a[i] - b[j]);
    return d;
}

}  // namespace

double norm2(const ComplexMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    return svd.singularValues()(0);
}

double sigma_min(const ComplexMatrix& a) {
    require_square(a, "sigma_min argument");
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = norm2(a);
    return norm2(a - a.adjoint()) <= tol * scale;
}

void require_finite(const ComplexMatrix& a, const char* what) {
    if (a.rows() == 0 || a.cols() == 0)
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " has an empty dimension");
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const cplx v = a.data()[i];
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorCode::InvalidArgument, std::string(what) + " has non-finite entries");
    }
}

void require_hermitian(const ComplexMatrix& a, const char* what, double tol) {
    require_square(a, what);
    if (!is_hermitian(a, tol))
        throw Error(ErrorCode::NonHermitianInput, std::string(what) + " is not Hermitian");
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
    return (a + a.adjoint()) * 0.5;
}

HermitianEigen herm_eig(const ComplexMatrix& a, double tol_herm) {
    require_hermitian(a, "herm_eig argument", tol_herm);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian_part(a));
    return {es.eigenvalues(), es.eigenvectors()};
}

std::vector<cplx> general_eig(const ComplexMatrix& a) {
    require_square(a, "general_eig argument");
    Eigen::ComplexEigenSolver<ComplexMatrix> es(a, /*computeEigenvectors=*/false);
    const ComplexVector& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

LinearSolution solve(const ComplexMatrix& a, const ComplexMatrix& b, double tol_sing) {
    require_square(a, "solve matrix");
    if (a.rows() != b.rows())
        throw Error(ErrorCode::DimensionMismatch, "solve right-hand side has wrong row count");
    Eigen::JacobiSVD<ComplexMatrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    if (!(smin > tol_sing * smax)) {
        throw Error(ErrorCode::NumericallySingular,
                    "smallest singular value " + std::to_string(smin) + " below tolerance");
    }
    Eigen::PartialPivLU<ComplexMatrix> lu(a);
    return {lu.solve(b), smin / smax, smin};
}

cplx det(const ComplexMatrix& a) {
    require_square(a, "det argument");
    if (a.size() == 0) return {1.0, 0.0};
    return Eigen::PartialPivLU<ComplexMatrix>(a).determinant();
}

ComplexMatrix psd_sqrt(const ComplexMatrix& a, double tol_psd) {
    const HermitianEigen eig = herm_eig(a, std::max(tol_psd, kTolHerm));
    const double scale = eig.values.cwiseAbs().maxCoeff();
    RealVector root(eig.values.size());
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        const double v = eig.values(i);
        if (v < -tol_psd * scale)
            throw Error(ErrorCode::NotPositiveSemidefinite,
                        "eigenvalue " + std::to_string(v) + " is negative beyond tolerance");
        root(i) = v > 0.0 ? std::sqrt(v) : 0.0;
    }
    ComplexMatrix b = eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
    return hermitian_part(b);
}

ComplexMatrix range_projector(const ComplexMatrix& a, double rank_tol) {
    const HermitianEigen eig = herm_eig(a, 1e-8);
    const double scale = eig.values.cwiseAbs().maxCoeff();
    const Eigen::Index n = a.rows();
    ComplexMatrix p = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (eig.values(i) > rank_tol * scale && scale > 0.0)
            p += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    }
    return p;
}

std::vector<int> optimal_assignment(const Eigen::MatrixXd& cost) {
    if (cost.rows() != cost.cols())
        throw Error(ErrorCode::DimensionMismatch, "assignment cost matrix must be square");
    const int n = static_cast<int>(cost.rows());
    if (n > 6) return hungarian(cost);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double c = 0.0;
        for (int i = 0; i < n; ++i) c += cost(i, perm[i]);
        if (c < best_cost) {
            best_cost = c;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double multiset_distance(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch, "multisets differ in size");
    if (a.empty()) return 0.0;
    const Eigen::MatrixXd d = distance_matrix(a, b);
    const auto assign = optimal_assignment(d);
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += d(i, assign[i]);
    return total;
}

double multiset_max_deviation(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::DimensionMismatch, "multisets differ in size");
    if (a.empty()) return 0.0;
    const Eigen::MatrixXd d = distance_matrix(a, b);
    const auto assign = optimal_assignment(d);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, d(i, assign[i]));
    return worst;
}

}  // namespace numerics
}  // namespace resflow
