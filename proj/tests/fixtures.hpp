#pragma once

#include <initializer_list>
#include <random>

#include "resflow/model.hpp"

namespace fixture {

using resflow::ComplexMatrix;
using resflow::cplx;

inline ComplexMatrix diag(std::initializer_list<double> d) {
    ComplexMatrix m = ComplexMatrix::Zero(d.size(), d.size());
    Eigen::Index i = 0;
    for (const double v : d) m(i, i) = v, ++i;
    return m;
}

inline resflow::Instance make(ComplexMatrix h0, ComplexMatrix f, ComplexMatrix j) {
    return resflow::Instance{std::move(h0), std::move(f), std::move(j)};
}

// H0 = [-1], F = [1], J = [1].
inline resflow::Instance scalar() { return make(diag({-1}), diag({1}), diag({1})); }

// H0 = [1], F = [1], J = [-1].
inline resflow::Instance time_reversed() { return make(diag({1}), diag({1}), diag({-1})); }

inline resflow::Instance diagonal() { return make(diag({1, -1}), diag({1, 1}), diag({1, 1})); }

inline resflow::Instance degenerate() { return make(diag({-1, -1}), diag({1, 1}), diag({1, 1})); }

inline resflow::Instance zero_coupling() { return make(diag({1, -1}), diag({1, 1}), diag({0, 0})); }

inline resflow::ValidatedInstance v(const resflow::Instance& inst) { return resflow::validate_instance(inst); }

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index n) {
    const ComplexMatrix a = random_matrix(rng, n, n);
    return 0.5 * (a + a.adjoint());
}

inline std::vector<int> mixed_signature(int k, std::uint64_t seed) {
    std::vector<int> s;
    for (int i = 0; i < k; ++i) s.push_back(((seed >> i) & 1U) ? -1 : 1);
    return s;
}

}  // namespace fixture
