#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "resflow/flow.hpp"
#include "resflow/resonance.hpp"

namespace resflow {

using json = nlohmann::json;

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitNumerical = 3,
    kExitInequality = 4,
};

// Instance JSON: {"n", "k", "H0", "F", "J"}, matrices row-major with
// complex entries as [re, im].
json instance_to_json(const Instance& inst);
Instance instance_from_json(const json& j);  // also accepts {"instance": {...}, ...}
Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

json tolerance_to_json(const ToleranceConfig& tol);
void apply_tolerance_json(ToleranceConfig& tol, const json& j);

/// One (instance, lambda) line of a verification report.
struct VerificationRow {
    double lambda = 0.0;
    int total_index = 0;
    int mu = 0;
    int mu_a = 0;
    int mu_s = 0;
    bool equality_holds = false;
    std::optional<int> oracle_crossings;  // empty when the oracle itself failed
    IndexReport index;
    double seconds = 0.0;
};

/// Runs the resonance index, mu, mu_a, mu_s and the crossing oracle at one
/// lambda over the window [0, 1].
VerificationRow verify_lambda(const ValidatedInstance& inst, double lambda, std::span<const double> thetas,
                              const ToleranceConfig& tol = {}, FlowOptions opts = {});

json to_json(const VerificationRow& row);

/// Instance whose coupling interval [0, 1] corresponds to [a, b] of `inst`:
/// H0 + a V as base and (b - a) J as coupling matrix.
Instance rescale_window(const Instance& inst, CouplingWindow window);

enum class SignatureMode { Plus, Minus, Mixed };

struct SweepCase {
    std::uint64_t seed = 0;
    int n = 0;
    int k = 0;
    std::vector<int> signature;
    Instance instance;
};

/// Dimensions and signature drawn from `seed`, then random_instance with the same seed.
SweepCase sweep_case(std::uint64_t seed, int n_min, int n_max, int k_min, int k_max, SignatureMode mode);

/// Seed from RESFLOW_SEED when set and parseable, otherwise `fallback`.
std::uint64_t default_seed(std::uint64_t fallback = 0);

/// Entry point of the resflow tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace resflow
