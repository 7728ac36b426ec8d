#include <numbers>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "resflow/contour.hpp"
#include "resflow/error.hpp"
#include "resflow/flow.hpp"

using namespace resflow;
using fixture::diag;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Io;
}

Trajectory phase_only(std::vector<std::vector<double>> phases) {
    Trajectory t;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        t.t.push_back(static_cast<double>(i));
        t.param.push_back(static_cast<double>(i));
        std::vector<cplx> e;
        for (const double p : phases[i]) e.push_back(std::polar(1.0, p));
        t.eigenvalues.push_back(e);
        t.determinants.push_back(1.0);
    }
    t.phases = std::move(phases);
    return t;
}

// Lifted phase of the scalar S(y) = (y^2 - 1/4 - iy)/(y^2 - 1/4 + iy), starting at 0 for y = 0.
double scalar_phase(double y) {
    const double w = std::arg(cplx(y * y - 0.25, y));  // pi at y = 0, decreasing to 0
    return 2.0 * (kPi - w);
}

UnitaryPath constant_path(ComplexMatrix m) {
    UnitaryPath p;
    p.evaluate = [m](double) { return m; };
    p.description = "constant";
    return p;
}

UnitaryPath rotation_path(double turns) {
    UnitaryPath p;
    p.evaluate = [turns](double t) {
        ComplexMatrix m = ComplexMatrix::Identity(2, 2);
        m(0, 0) = std::polar(1.0, 2.0 * kPi * turns * t);
        return m;
    };
    p.description = "rotation";
    return p;
}

void check_det_consistency(const FlowResult& r) {
    CHECK(std::abs(r.det_winding_raw - r.phase_winding_raw) <= 1e-6);
    CHECK(r.det_winding == static_cast<int>(std::lround(r.phase_winding_raw)));
}

}  // namespace

TEST_CASE("constant identity path has zero phases") {
    const Trajectory t = track_eigenvalues(constant_path(ComplexMatrix::Identity(3, 3)), 9);
    for (const auto& row : t.phases)
        for (const double p : row) CHECK(p == 0.0);
}

TEST_CASE("scalar y-path follows the closed-form phase") {
    const auto inst = fixture::v(fixture::scalar());
    const double y_max = choose_y_max(inst, -0.5);
    const Trajectory t = track_eigenvalues(y_path(inst, -0.5, 1.0, 0.0, y_max), 65);
    REQUIRE(t.tracks() == 1);
    CHECK(t.phases.front()[0] == 0.0);
    CHECK(std::abs(t.phases.back()[0] - scalar_phase(y_max)) < 1e-9);
    CHECK(std::abs(t.phases.back()[0] - 2.0 * kPi) < 0.1);
    bool passed_pi = false;
    for (std::size_t i = 0; i < t.samples(); ++i) {
        const double y = t.param[i];
        CHECK(std::abs(t.phases[i][0] - scalar_phase(y)) < 1e-9);
        CHECK(std::abs(t.eigenvalues[i][0] - oracle::scalar_S(y)) < 1e-10);
        if (i > 0) CHECK(std::abs(t.phases[i][0] - t.phases[i - 1][0]) <= 0.2 + 1e-12);
        if (i > 0 && t.param[i - 1] < 0.5 && y >= 0.5) passed_pi = t.phases[i - 1][0] < kPi && t.phases[i][0] >= kPi;
    }
    CHECK(passed_pi);
}

TEST_CASE("diagonal instance has channel windings 1 and 0") {
    const auto inst = fixture::v(fixture::diagonal());
    const FlowResult r = mu_invariant(inst, -0.5, kPi);
    std::vector<double> w;
    for (std::size_t j = 0; j < 2; ++j)
        w.push_back((r.trajectory.phases.back()[j] - r.trajectory.phases.front()[j]) / (2.0 * kPi));
    std::sort(w.begin(), w.end());
    CHECK(std::abs(w[0]) < 0.02);
    CHECK(std::abs(w[1] - 1.0) < 0.02);
    CHECK(r.mu == -1);
    check_det_consistency(r);
}

TEST_CASE("crossing floor formula") {
    const auto one = crossings(phase_only({{0.0}, {2.0 * kPi}}), kPi);
    CHECK(one.per_track == std::vector<int>{1});
    CHECK(one.mu == -1);
    CHECK(oracle::floor_crossings(0.0, 2.0 * kPi, kPi) == 1);

    CHECK(crossings(phase_only({{0.3}, {0.3}}), kPi).mu == 0);

    const auto back = crossings(phase_only({{0.0}, {-4.0 * kPi}}), kPi / 2);
    CHECK(back.per_track == std::vector<int>{-2});
    CHECK(back.mu == 2);

    CHECK(code_of([] { crossings(phase_only({{0.0}, {1.0}}), 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { crossings(phase_only({{0.0}, {kPi}}), kPi); }) == ErrorCode::PhaseOnTarget);
}

TEST_CASE("mu invariant examples") {
    const auto s = fixture::v(fixture::scalar());
    const FlowResult r = mu_invariant(s, -0.5, kPi);
    CHECK(r.mu == -1);
    check_det_consistency(r);
    CHECK(r.y_max >= 1.0);
    for (const double th : {kPi / 2, kPi, 3 * kPi / 2}) CHECK(mu_invariant(s, -0.5, th).mu == -1);

    CHECK(mu_invariant(fixture::v(fixture::zero_coupling()), 0.0, kPi).mu == 0);
    CHECK(code_of([&] { mu_invariant(s, -0.5, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { mu_invariant(s, 0.0, kPi); }) == ErrorCode::ResonantEndpoint);
}

TEST_CASE("mu_a invariant is zero in finite dimension") {
    CHECK(mu_a_invariant(fixture::v(fixture::scalar()), -0.5, kPi).mu == 0);
    CHECK(mu_a_invariant(fixture::v(fixture::zero_coupling()), 0.0, kPi).mu == 0);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = fixture::v(random_instance(4, 2, fixture::mixed_signature(2, seed), seed));
        for (const double l : lambda_grid(inst, 2)) {
            const FlowResult r = mu_a_invariant(inst, l, 2.0);
            CHECK(r.mu == 0);
            for (const auto& row : r.trajectory.phases)
                for (const double p : row) CHECK(std::abs(p) < 1e-12);
        }
    }
}

TEST_CASE("gap and matching failures") {
    UnitaryPath jump;
    jump.evaluate = [](double t) {
        ComplexMatrix m(1, 1);
        m(0, 0) = t < 0.5 ? 1.0 : -1.0;
        return m;
    };
    jump.description = "jump";
    CHECK(code_of([&] { track_eigenvalues(jump, 9); }) == ErrorCode::MatchingAmbiguous);
    jump.gaps.emplace_back(0.45, 0.55);
    CHECK(code_of([&] { track_eigenvalues(jump, 9); }) == ErrorCode::GapTooWide);

    UnitaryPath bad = constant_path(diag({2.0}));
    CHECK(code_of([&] { track_eigenvalues(bad, 3); }) == ErrorCode::InvalidArgument);
    bad.unitary = false;
    CHECK_NOTHROW(track_eigenvalues(bad, 3));
}

TEST_CASE("reversal and concatenation") {
    const UnitaryPath a = rotation_path(1.3);
    const double theta = 2.0;
    const int mu_a = crossings(track_eigenvalues(a, 33), theta).mu;
    const int mu_rev = crossings(track_eigenvalues(reverse(a), 33), theta).mu;
    CHECK(mu_a == -1);
    CHECK(mu_rev == 1);

    const UnitaryPath loop = concatenate({a, reverse(a)});
    CHECK(crossings(track_eigenvalues(loop, 65), theta).mu == 0);

    UnitaryPath c = rotation_path(0.7);
    UnitaryPath d;
    d.evaluate = [](double t) {
        ComplexMatrix m = ComplexMatrix::Identity(2, 2);
        m(0, 0) = std::polar(1.0, 2.0 * kPi * (0.7 + 0.8 * t));
        return m;
    };
    d.description = "continuation";
    const int mu_c = crossings(track_eigenvalues(c, 33), theta).mu;
    const int mu_d = crossings(track_eigenvalues(d, 33), theta).mu;
    CHECK(crossings(track_eigenvalues(concatenate({c, d}), 65), theta).mu == mu_c + mu_d);
}

TEST_CASE("singular mu") {
    const auto thetas = theta_grid(5);
    REQUIRE(thetas.size() == 5);
    CHECK(thetas.front() > 0.1);
    CHECK(thetas.back() < 2.0 * kPi - 0.1);
    CHECK(mu_singular(fixture::v(fixture::scalar()), -0.5, thetas) == -1);
    CHECK(mu_singular(fixture::v(fixture::zero_coupling()), 0.0, thetas) == 0);
    CHECK(mu_singular(fixture::v(fixture::degenerate()), -0.5, thetas) == -2);
    const auto few = theta_grid(3);
    CHECK(code_of([&] { mu_singular(fixture::v(fixture::scalar()), -0.5, few); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("mu_a along the detoured rectangle") {
    const auto s = fixture::v(fixture::scalar());
    const FlowResult r = mu_a_contour(s, -0.5, kPi, 0.01, 0.05);
    CHECK(r.mu == 0);
    CHECK(r.mu == mu_a_invariant(s, -0.5, kPi).mu);
    CHECK(mu_rectangle(s, -0.5, kPi, 0.01).mu == mu_invariant(s, -0.5, kPi).mu);
    CHECK(mu_a_contour(fixture::v(fixture::zero_coupling()), 0.0, kPi, 0.01, 0.05).mu == 0);

    // No resonance points in [0, 1]: detoured and straight paths coincide.
    const auto none = fixture::v(fixture::scalar());
    CHECK(resonance_points(none, 0.5, 0.0, {}).empty());
    CHECK(mu_a_contour(none, 0.5, kPi, 0.01, 0.05).mu == mu_rectangle(none, 0.5, kPi, 0.01).mu);
    CHECK(mu_rectangle(none, 0.5, kPi, 0.01).mu == mu_invariant(none, 0.5, kPi).mu);

    // Group larger than the detour.
    CHECK(code_of([&] { mu_a_contour(s, -0.5, kPi, 0.2, 0.05); }) == ErrorCode::ClusterSeparationFailure);
}

TEST_CASE("sample-count invariance and det consistency on random instances") {
    for (std::uint64_t seed = 1; seed <= 15; ++seed) {
        const int n = 2 + static_cast<int>(seed % 5);
        const int k = 1 + static_cast<int>(seed % std::min<std::uint64_t>(n, 3));
        const auto inst = fixture::v(random_instance(n, k, fixture::mixed_signature(k, seed), seed));
        for (const double l : lambda_grid(inst, 2)) {
            std::vector<int> mus;
            for (const int samples : {33, 65, 129}) {
                const FlowResult r = mu_invariant(inst, l, kPi, {}, FlowOptions{samples});
                check_det_consistency(r);
                mus.push_back(r.mu);
            }
            CHECK(mus[0] == mus[1]);
            CHECK(mus[1] == mus[2]);
            // Sampled det winding equals the library's contour-side winding of the same samples.
            const FlowResult r = mu_invariant(inst, l, kPi);
            CHECK(sampled_winding(r.trajectory.determinants).winding == r.det_winding);
        }
    }
}

TEST_CASE("Y_max certificate") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto inst = fixture::v(random_instance(5, 2, fixture::mixed_signature(2, seed), seed));
        const double l = lambda_grid(inst, 1).front();
        const double y = choose_y_max(inst, l);
        for (const double s : {0.0, 0.25, 0.5, 1.0}) {
            const ComplexMatrix S = scattering_matrix(inst, {l, y}, s).S;
            CHECK(numerics::norm2(S - ComplexMatrix::Identity(2, 2)) < 0.01);
        }
    }
}

TEST_CASE("trajectory CSV") {
    const auto s = fixture::v(fixture::scalar());
    const FlowResult r = mu_invariant(s, -0.5, kPi);
    std::ostringstream out;
    write_trajectory_csv(out, r.trajectory);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "t,param,track0_re,track0_im,track0_phase");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == static_cast<int>(r.trajectory.samples()));

    const auto d = fixture::v(fixture::diagonal());
    std::ostringstream out2;
    write_trajectory_csv(out2, mu_invariant(d, -0.5, kPi).trajectory);
    CHECK(out2.str().rfind("t,param,track0_re,track0_im,track0_phase,track1_re,track1_im,track1_phase\n", 0) == 0);
}
