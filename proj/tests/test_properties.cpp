// Cross-module properties on seeded random instances.

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "resflow/cli.hpp"
#include "resflow/contour.hpp"
#include "resflow/error.hpp"

using namespace resflow;

TEST_CASE("main identity on a small random corpus") {
    const auto thetas = theta_grid(5);
    int cases = 0;
    for (std::uint64_t seed = 200; seed < 230; ++seed) {
        const SweepCase c = sweep_case(seed, 2, 8, 1, 4, SignatureMode::Mixed);
        const auto inst = validate_instance(c.instance);
        for (const double l : lambda_grid(inst, 3)) {
            const VerificationRow row = verify_lambda(inst, l, thetas);
            CHECK(row.equality_holds);
            CHECK(row.mu_a == 0);
            // Brute-force count of eigenvalues of H_0 and H_1 below lambda.
            const int below0 = oracle::count_below(oracle::from_eigen(inst.H0()), l);
            const int below1 = oracle::count_below(oracle::from_eigen(perturbed_operator(inst.instance, 1.0)), l);
            CHECK(row.total_index == below0 - below1);
            ++cases;
        }
    }
    CHECK(cases == 90);
}

TEST_CASE("group S-index equals the resonance index") {
    for (std::uint64_t seed = 300; seed < 330; ++seed) {
        const SweepCase c = sweep_case(seed, 2, 6, 1, 3, SignatureMode::Mixed);
        const auto inst = validate_instance(c.instance);
        for (const double l : lambda_grid(inst, 2)) {
            for (const auto& p : resonance_points(inst, l, 0.0, {})) {
                const PointIndex idx = resonance_index(inst, l, p);
                CHECK(group_s_index(inst, l, p, idx.y_used) == idx.index);
            }
        }
    }
}

TEST_CASE("detoured rectangle reproduces mu_a, straight rectangle reproduces mu") {
    for (std::uint64_t seed = 400; seed < 410; ++seed) {
        const SweepCase c = sweep_case(seed, 2, 5, 1, 3, SignatureMode::Mixed);
        const auto inst = validate_instance(c.instance);
        const double l = lambda_grid(inst, 1).front();
        const auto pts = resonance_points(inst, l, 0.0, {});
        double gap = 1.0;
        double prev = 0.0;
        for (const auto& p : pts) {
            gap = std::min(gap, p.location.real() - prev);
            prev = p.location.real();
        }
        gap = std::min(gap, 1.0 - prev);
        const double rho = 0.3 * gap;
        // Groups move by O(y), so y0 well below rho keeps them inside.
        double y0 = 0.05 * rho;
        FlowResult r;
        bool ok = false;
        for (int attempt = 0; attempt < 8 && !ok; ++attempt, y0 *= 0.5) {
            try {
                r = mu_a_contour(inst, l, std::numbers::pi, y0, rho);
                ok = true;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::ClusterSeparationFailure) throw;
            }
        }
        REQUIRE(ok);
        CHECK(r.mu == mu_a_invariant(inst, l, std::numbers::pi).mu);
        CHECK(mu_rectangle(inst, l, std::numbers::pi, y0).mu == mu_invariant(inst, l, std::numbers::pi).mu);
    }
}

TEST_CASE("contour tracking sums to the S-index") {
    const auto inst = validate_instance(fixture::degenerate());
    const auto tr = track_contour(inst, -0.5, 0.05, Contour{{0.5, 0.05}, 0.02, 64});
    double sum = 0.0;
    for (const double w : tr.cycle_windings) sum += w;
    CHECK(sum == doctest::Approx(static_cast<double>(s_index(inst, -0.5, 0.05, {0.5, 0.05}, 0.02))).epsilon(1e-9));
    CHECK(std::lround(sum) == -2);
    for (const double w : tr.cycle_windings) CHECK(std::abs(w - std::round(w)) < 1e-9);
}
