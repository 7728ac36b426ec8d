#pragma once

// Reference computations used only by the tests. None of them call into the
// library's linear algebra: plain loops over std::complex.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "resflow/model.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = std::vector<std::vector<cplx>>;

inline Mat from_eigen(const resflow::ComplexMatrix& m) {
    Mat out(m.rows(), std::vector<cplx>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

inline resflow::ComplexMatrix to_eigen(const Mat& m) {
    resflow::ComplexMatrix out(m.size(), m.empty() ? 0 : m[0].size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[i].size(); ++j) out(i, j) = m[i][j];
    return out;
}

inline Mat identity(std::size_t n) {
    Mat m(n, std::vector<cplx>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

inline Mat mul(const Mat& a, const Mat& b) {
    const std::size_t n = a.size(), p = b.size(), m = b.empty() ? 0 : b[0].size();
    Mat c(n, std::vector<cplx>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < p; ++k)
            for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline Mat add(const Mat& a, const Mat& b, cplx beta = 1.0) {
    Mat c = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) c[i][j] += beta * b[i][j];
    return c;
}

inline Mat adjoint(const Mat& a) {
    Mat c(a.empty() ? 0 : a[0].size(), std::vector<cplx>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) c[j][i] = std::conj(a[i][j]);
    return c;
}

inline double frob(const Mat& a) {
    double s = 0.0;
    for (const auto& r : a)
        for (const cplx v : r) s += std::norm(v);
    return std::sqrt(s);
}

// Laplace expansion along the first row.
inline cplx cofactor_det(const Mat& a) {
    const std::size_t n = a.size();
    if (n == 1) return a[0][0];
    if (n == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    cplx d = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        Mat minor;
        for (std::size_t i = 1; i < n; ++i) {
            std::vector<cplx> row;
            for (std::size_t j = 0; j < n; ++j)
                if (j != c) row.push_back(a[i][j]);
            minor.push_back(row);
        }
        d += (c % 2 == 0 ? 1.0 : -1.0) * a[0][c] * cofactor_det(minor);
    }
    return d;
}

// Gauss-Jordan with full pivoting.
inline Mat inverse(Mat a) {
    const std::size_t n = a.size();
    Mat inv = identity(n);
    std::vector<std::size_t> colperm(n);
    for (std::size_t i = 0; i < n; ++i) colperm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pr = k, pc = k;
        double best = -1.0;
        for (std::size_t i = k; i < n; ++i)
            for (std::size_t j = k; j < n; ++j)
                if (std::abs(a[i][j]) > best) {
                    best = std::abs(a[i][j]);
                    pr = i;
                    pc = j;
                }
        std::swap(a[k], a[pr]);
        std::swap(inv[k], inv[pr]);
        if (pc != k) {
            for (std::size_t i = 0; i < n; ++i) std::swap(a[i][k], a[i][pc]);
            std::swap(colperm[k], colperm[pc]);
        }
        const cplx p = a[k][k];
        for (std::size_t j = 0; j < n; ++j) {
            a[k][j] /= p;
            inv[k][j] /= p;
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k) continue;
            const cplx f = a[i][k];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[i][j] -= f * a[k][j];
                inv[i][j] -= f * inv[k][j];
            }
        }
    }
    // Undo the column permutation: rows of the inverse follow it.
    Mat out(n);
    for (std::size_t k = 0; k < n; ++k) out[colperm[k]] = inv[k];
    return out;
}

// Coefficients c[0..n] of det(x I - A) = sum c[i] x^(n-i), by Faddeev-LeVerrier.
inline std::vector<cplx> char_poly(const Mat& a) {
    const std::size_t n = a.size();
    std::vector<cplx> c(n + 1, 0.0);
    c[0] = 1.0;
    Mat m = identity(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const Mat am = mul(a, m);
        cplx tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += am[i][i];
        c[k] = -tr / static_cast<double>(k);
        m = am;
        for (std::size_t i = 0; i < n; ++i) m[i][i] += c[k];
    }
    return c;
}

// Durand-Kerner iteration on a monic polynomial.
inline std::vector<cplx> poly_roots(const std::vector<cplx>& c) {
    const std::size_t n = c.size() - 1;
    std::vector<cplx> z(n);
    double bound = 0.0;
    for (std::size_t i = 1; i <= n; ++i) bound = std::max(bound, std::abs(c[i]));
    const double r = 1.0 + bound;
    for (std::size_t i = 0; i < n; ++i) z[i] = r * std::polar(1.0, 0.4 + 2.0 * std::numbers::pi * i / n);
    auto eval = [&](cplx x) {
        cplx v = c[0];
        for (std::size_t i = 1; i <= n; ++i) v = v * x + c[i];
        return v;
    };
    for (int it = 0; it < 2000; ++it) {
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx den = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) den *= z[i] - z[j];
            if (den == 0.0) den = 1e-300;
            const cplx dz = eval(z[i]) / den;
            z[i] -= dz;
            move = std::max(move, std::abs(dz));
        }
        if (move < 1e-15 * r) break;
    }
    // Newton polish on the polynomial.
    for (auto& x : z) {
        for (int it = 0; it < 5; ++it) {
            cplx v = c[0], d = 0.0;
            for (std::size_t i = 1; i <= n; ++i) {
                d = d * x + v;
                v = v * x + c[i];
            }
            if (d == 0.0) break;
            x -= v / d;
        }
    }
    return z;
}

inline std::vector<cplx> eigenvalues(const Mat& a) { return poly_roots(char_poly(a)); }

// Greedy-free pairing distance: brute force over permutations for small sets.
inline double paired_max_distance(std::vector<cplx> a, std::vector<cplx> b) {
    std::vector<std::size_t> p(b.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = i;
    double best = 1e300;
    do {
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[p[i]]));
        best = std::min(best, worst);
    } while (std::next_permutation(p.begin(), p.end()));
    return best;
}

// Principal square root of a Hermitian PSD matrix by Denman-Beavers iteration
// on A + eps I, then the shift is removed to first order.
inline Mat psd_sqrt(const Mat& a) {
    const std::size_t n = a.size();
    Mat y = a, z = identity(n);
    for (int it = 0; it < 100; ++it) {
        const Mat yi = inverse(y), zi = inverse(z);
        Mat yn = add(y, zi), zn = add(z, yi);
        for (auto& r : yn)
            for (auto& v : r) v *= 0.5;
        for (auto& r : zn)
            for (auto& v : r) v *= 0.5;
        const double change = frob(add(yn, y, -1.0));
        y = yn;
        z = zn;
        if (change < 1e-15 * (1.0 + frob(y))) break;
    }
    return y;
}

// T = F (H - z)^{-1} F*.
inline Mat sandwiched(const Mat& h, const Mat& f, cplx z) {
    Mat shifted = h;
    for (std::size_t i = 0; i < h.size(); ++i) shifted[i][i] -= z;
    return mul(mul(f, inverse(shifted)), adjoint(f));
}

// S = 1 - 2is sqrt(Im T) J (1 + sTJ)^{-1} sqrt(Im T), with Im T positive definite.
inline Mat scattering(const Mat& t, const Mat& j, cplx s) {
    const std::size_t k = t.size();
    Mat im = add(t, adjoint(t), -1.0);
    for (auto& r : im)
        for (auto& v : r) v /= cplx(0.0, 2.0);
    const Mat sq = psd_sqrt(im);
    Mat a = mul(t, j);
    for (auto& r : a)
        for (auto& v : r) v *= s;
    a = add(identity(k), a);
    Mat core = mul(mul(sq, j), mul(inverse(a), sq));
    return add(identity(k), core, -2.0 * cplx(0.0, 1.0) * s);
}

// Scalar instance H0 = [-1], F = [1], J = [1] at lambda = -0.5.
inline cplx scalar_T(double y) { return 1.0 / cplx(-0.5, -y); }
inline cplx scalar_S(double y) {
    const double a = y * y - 0.25;
    return cplx(a, -y) / cplx(a, y);
}

// Net anticlockwise passages through e^{i theta} of a lifted phase path.
inline int floor_crossings(double phi0, double phi1, double theta) {
    const double tp = 2.0 * std::numbers::pi;
    return static_cast<int>(std::floor((phi1 - theta) / tp) - std::floor((phi0 - theta) / tp));
}

// Eigenvalues of a Hermitian matrix below lambda, from the characteristic polynomial.
inline int count_below(const Mat& h, double lambda) {
    int c = 0;
    for (const cplx e : eigenvalues(h))
        if (e.real() < lambda) ++c;
    return c;
}

}  // namespace oracle
