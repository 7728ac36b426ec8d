#include "resflow/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "resflow/contour.hpp"
#include "resflow/error.hpp"

namespace resflow {

namespace {

json matrix_to_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
        throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has the wrong number of rows");
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has the wrong number of columns");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const json& e = row[c];
            if (e.is_number()) {
                m(i, c) = {e.get<double>(), 0.0};
            } else if (e.is_array() && e.size() == 2) {
                m(i, c) = {e[0].get<double>(), e[1].get<double>()};
            } else {
                throw Error(ErrorCode::Io, std::string(name) + " entries must be [re, im] pairs");
            }
        }
    }
    return m;
}

struct TolField {
    const char* name;
    double ToleranceConfig::*value;
};

struct TolIntField {
    const char* name;
    int ToleranceConfig::*value;
};

constexpr TolField kTolFields[] = {
    {"tol_herm", &ToleranceConfig::tol_herm},
    {"tol_psd", &ToleranceConfig::tol_psd},
    {"tol_sing", &ToleranceConfig::tol_sing},
    {"tol_real", &ToleranceConfig::tol_real},
    {"tol_unitary", &ToleranceConfig::tol_unitary},
    {"tol_critical", &ToleranceConfig::tol_critical},
    {"cluster_factor", &ToleranceConfig::cluster_factor},
    {"max_step_phase", &ToleranceConfig::max_step_phase},
    {"theta_margin", &ToleranceConfig::theta_margin},
};

constexpr TolIntField kTolIntFields[] = {
    {"min_contour_samples", &ToleranceConfig::min_contour_samples},
    {"max_adaptive_depth", &ToleranceConfig::max_adaptive_depth},
};

std::string flag_name(const char* field) {
    std::string s = field;
    for (char& c : s)
        if (c == '_') c = '-';
    if (s.rfind("tol-", 0) != 0) s = "tol-" + s;
    return "--" + s;
}

// Options shared by every subcommand. Only one subcommand is parsed per run,
// so all of them can bind the same storage.
struct Common {
    std::string instance_path;
    std::string config_path;
    bool json_out = false;
    ToleranceConfig flag_values;
    std::vector<std::pair<CLI::Option*, double ToleranceConfig::*>> tol_opts;
    std::vector<std::pair<CLI::Option*, int ToleranceConfig::*>> tol_int_opts;

    void add_tolerances(CLI::App* app) {
        app->add_option("--config", config_path, "JSON file with tolerance overrides");
        app->add_flag("--json", json_out, "Machine-readable output");
        for (const auto& f : kTolFields)
            tol_opts.emplace_back(app->add_option(flag_name(f.name), flag_values.*(f.value)), f.value);
        for (const auto& f : kTolIntFields)
            tol_int_opts.emplace_back(app->add_option(flag_name(f.name), flag_values.*(f.value)), f.value);
    }

    ToleranceConfig tolerances() const {
        ToleranceConfig tol;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error(ErrorCode::Io, "cannot open config file " + config_path);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw Error(ErrorCode::Io, "config file is not valid JSON: " + std::string(e.what()));
            }
            apply_tolerance_json(tol, j.contains("tolerances") ? j["tolerances"] : j);
        }
        for (const auto& [opt, member] : tol_opts)
            if (opt->count() > 0) tol.*member = flag_values.*member;
        for (const auto& [opt, member] : tol_int_opts)
            if (opt->count() > 0) tol.*member = flag_values.*member;
        tol.validate();
        return tol;
    }
};

int exit_code_for(const Error& e) {
    return e.code() == ErrorCode::InvalidArgument ? kExitUsage : kExitNumerical;
}

void report_error(const Error& e, bool json_out, std::ostream& out, std::ostream& err) {
    if (json_out) {
        json j;
        j["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
        out << j.dump(2) << "\n";
    } else {
        err << "error: " << e.what() << "\n";
    }
}

std::string signed_int(int v) {
    return v > 0 ? "+" + std::to_string(v) : std::to_string(v);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<int> parse_signature(const std::string& text, int k) {
    if (text.empty()) return std::vector<int>(static_cast<std::size_t>(std::max(k, 0)), 1);
    std::vector<int> sig;
    for (const char c : text) {
        if (c == '+') sig.push_back(1);
        else if (c == '-') sig.push_back(-1);
        else throw Error(ErrorCode::InvalidArgument, "signature must consist of '+' and '-'");
    }
    if (static_cast<int>(sig.size()) != k)
        throw Error(ErrorCode::InvalidArgument, "signature length must equal k");
    return sig;
}

json point_json(const PointIndex& p) {
    json g = json::array();
    for (const cplx r : p.group) g.push_back({r.real(), r.imag()});
    return {{"location", p.location}, {"multiplicity", p.multiplicity}, {"n_plus", p.n_plus},
            {"n_minus", p.n_minus},   {"index", p.index},               {"y_used", p.y_used},
            {"cluster_radius", p.cluster_radius}, {"group", g}};
}

}  // namespace

json instance_to_json(const Instance& inst) {
    json j;
    j["n"] = inst.n();
    j["k"] = inst.k();
    j["H0"] = matrix_to_json(inst.H0);
    j["F"] = matrix_to_json(inst.F);
    j["J"] = matrix_to_json(inst.J);
    return j;
}

Instance instance_from_json(const json& j) {
    if (j.is_object() && j.contains("instance")) return instance_from_json(j["instance"]);
    try {
        const Eigen::Index n = j.at("n").get<Eigen::Index>();
        const Eigen::Index k = j.at("k").get<Eigen::Index>();
        if (n < 1 || k < 1) throw Error(ErrorCode::DimensionMismatch, "n and k must be positive");
        Instance inst;
        inst.H0 = matrix_from_json(j.at("H0"), n, n, "H0");
        inst.F = matrix_from_json(j.at("F"), k, n, "F");
        inst.J = matrix_from_json(j.at("J"), k, k, "J");
        return inst;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, std::string("malformed instance JSON: ") + e.what());
    }
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open instance file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Io, "instance file is not valid JSON: " + std::string(e.what()));
    }
    return instance_from_json(j);
}

void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << instance_to_json(inst).dump(2) << "\n";
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

json tolerance_to_json(const ToleranceConfig& tol) {
    json j;
    for (const auto& f : kTolFields) j[f.name] = tol.*(f.value);
    for (const auto& f : kTolIntFields) j[f.name] = tol.*(f.value);
    return j;
}

void apply_tolerance_json(ToleranceConfig& tol, const json& j) {
    if (!j.is_object()) throw Error(ErrorCode::Io, "tolerance config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const auto& f : kTolFields)
            if (key == f.name) {
                tol.*(f.value) = value.get<double>();
                known = true;
            }
        for (const auto& f : kTolIntFields)
            if (key == f.name) {
                tol.*(f.value) = value.get<int>();
                known = true;
            }
        if (!known) throw Error(ErrorCode::InvalidArgument, "unknown tolerance key '" + key + "'");
    }
}

VerificationRow verify_lambda(const ValidatedInstance& inst, double lambda, std::span<const double> thetas,
                              const ToleranceConfig& tol, FlowOptions opts) {
    const auto t0 = std::chrono::steady_clock::now();
    VerificationRow row;
    row.lambda = lambda;
    row.index = total_resonance_index(inst, lambda, {0.0, 1.0}, tol);
    row.total_index = row.index.total;
    const SingularFlow sf = singular_flow(inst, lambda, thetas, tol, opts);
    row.mu = sf.mu.front();
    row.mu_a = sf.mu_a.front();
    row.mu_s = sf.mu_s;
    row.equality_holds = -row.mu_s == row.total_index;
    try {
        row.oracle_crossings = crossing_oracle(inst, lambda, {0.0, 1.0}, 200, tol).net;
    } catch (const Error&) {
        row.oracle_crossings.reset();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

json to_json(const VerificationRow& row) {
    json pts = json::array();
    for (const auto& p : row.index.points) pts.push_back(point_json(p));
    json j = {{"lambda", row.lambda},
              {"total_index", row.total_index},
              {"mu", row.mu},
              {"mu_a", row.mu_a},
              {"mu_s", row.mu_s},
              {"equality_holds", row.equality_holds},
              {"points", pts},
              {"seconds", row.seconds}};
    j["oracle_crossings"] = row.oracle_crossings ? json(*row.oracle_crossings) : json(nullptr);
    return j;
}

Instance rescale_window(const Instance& inst, CouplingWindow window) {
    if (!(window.a < window.b)) throw Error(ErrorCode::InvalidArgument, "coupling window requires a < b");
    Instance out = inst;
    out.H0 = perturbed_operator(inst, window.a);
    out.H0 = (0.5 * (out.H0 + out.H0.adjoint())).eval();
    out.J = window.span() * inst.J;
    return out;
}

SweepCase sweep_case(std::uint64_t seed, int n_min, int n_max, int k_min, int k_max, SignatureMode mode) {
    if (n_min < 1 || n_max < n_min || k_min < 1 || k_max < k_min || k_min > n_max)
        throw Error(ErrorCode::InvalidArgument, "invalid sweep dimension ranges");
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    SweepCase c;
    c.seed = seed;
    c.n = n_min + static_cast<int>(rng() % static_cast<std::uint64_t>(n_max - n_min + 1));
    c.n = std::max(c.n, k_min);
    const int k_hi = std::min(k_max, c.n);
    c.k = k_min + static_cast<int>(rng() % static_cast<std::uint64_t>(k_hi - k_min + 1));
    for (int i = 0; i < c.k; ++i) {
        switch (mode) {
            case SignatureMode::Plus: c.signature.push_back(1); break;
            case SignatureMode::Minus: c.signature.push_back(-1); break;
            case SignatureMode::Mixed: c.signature.push_back((rng() >> 17) & 1U ? 1 : -1); break;
        }
    }
    c.instance = random_instance(c.n, c.k, c.signature, seed);
    return c;
}

std::uint64_t default_seed(std::uint64_t fallback) {
    const char* env = std::getenv("RESFLOW_SEED");
    if (env == nullptr || *env == '\0') return fallback;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    return end != nullptr && *end == '\0' ? static_cast<std::uint64_t>(v) : fallback;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Resonance index and spectral flow verification for finite-dimensional operator pairs", "resflow"};
    app.require_subcommand(1);
    Common common;

    // gen
    int gen_n = 0, gen_k = 0;
    std::string gen_signature, gen_out;
    std::uint64_t gen_seed = default_seed(0);
    auto* gen = app.add_subcommand("gen", "Write a seeded random instance");
    gen->add_option("--n", gen_n, "Dimension of H0")->required();
    gen->add_option("--k", gen_k, "Dimension of J")->required();
    gen->add_option("--signature", gen_signature, "Signs of J, e.g. +- (default all +)");
    gen->add_option("--seed", gen_seed, "Seed (default RESFLOW_SEED or 0)");
    gen->add_option("--out", gen_out, "Output path (default stdout)");

    // resonances
    double lambda = 0.0;
    std::vector<double> window_ab{0.0, 1.0};
    double base = 0.0;
    auto* res = app.add_subcommand("resonances", "List real resonance points in a coupling window");
    res->add_option("--instance", common.instance_path)->required();
    res->add_option("--lambda", lambda)->required();
    res->add_option("--window", window_ab, "Coupling window a b")->expected(2);
    res->add_option("--base", base, "Base coupling s_base");
    common.add_tolerances(res);

    // verify
    std::vector<double> lambdas;
    int lambda_grid_count = 0;
    int theta_count = 5;
    int samples = FlowOptions{}.initial_samples;
    auto* ver = app.add_subcommand("verify", "Check -mu_s = total resonance index");
    ver->add_option("--instance", common.instance_path)->required();
    auto* lambda_opt = ver->add_option("--lambda", lambdas, "Energy (repeatable)");
    ver->add_option("--lambda-grid", lambda_grid_count, "Use N energies from the gaps of spec(H0)")
        ->excludes(lambda_opt)
        ->check(CLI::PositiveNumber);
    ver->add_option("--thetas", theta_count, "Size of the theta grid")->check(CLI::Range(5, 1000));
    ver->add_option("--window", window_ab, "Coupling window a b")->expected(2);
    ver->add_option("--samples", samples, "Initial samples per flow path")->check(CLI::Range(2, 100000));
    common.add_tolerances(ver);

    // mu
    double theta = 0.0;
    std::string trajectory_path;
    auto* mu = app.add_subcommand("mu", "mu-invariant along y : 0 -> Y_max at s = 1");
    mu->add_option("--instance", common.instance_path)->required();
    mu->add_option("--lambda", lambda)->required();
    mu->add_option("--theta", theta)->required();
    mu->add_option("--trajectory", trajectory_path, "Write the eigenvalue trajectory as CSV");
    mu->add_option("--samples", samples, "Initial samples")->check(CLI::Range(2, 100000));
    common.add_tolerances(mu);

    // sindex
    double y = 0.0, radius = 0.0;
    std::vector<double> center;
    auto* sidx = app.add_subcommand("sindex", "Winding of det S(lambda + iy, s) around a circle in s");
    sidx->add_option("--instance", common.instance_path)->required();
    sidx->add_option("--lambda", lambda)->required();
    sidx->add_option("--y", y)->required();
    sidx->add_option("--center", center, "Center re im")->expected(2)->required();
    sidx->add_option("--radius", radius)->required();
    common.add_tolerances(sidx);

    // sweep
    int seeds = 100, per_instance = 3;
    std::uint64_t seed_start = default_seed(0);
    std::vector<int> n_range{2, 8}, k_range{1, 4};
    std::string signatures = "mixed", dump_dir = "sweep_failures";
    auto* sweep = app.add_subcommand("sweep", "Verify the identity over seeded random instances");
    sweep->add_option("--seeds", seeds, "Number of instances")->check(CLI::PositiveNumber);
    sweep->add_option("--seed-start", seed_start, "First seed (default RESFLOW_SEED or 0)");
    sweep->add_option("--n", n_range, "n or n_min n_max")->expected(1, 2);
    sweep->add_option("--k", k_range, "k or k_min k_max")->expected(1, 2);
    sweep->add_option("--signatures", signatures)->check(CLI::IsMember({"mixed", "plus", "minus"}));
    sweep->add_option("--lambdas-per-instance", per_instance)->check(CLI::PositiveNumber);
    sweep->add_option("--thetas", theta_count)->check(CLI::Range(5, 1000));
    sweep->add_option("--dump-dir", dump_dir, "Directory for failure replay files");
    common.add_tolerances(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const bool js = common.json_out;
    try {
        if (gen->parsed()) {
            if (gen_k < 1 || gen_n < gen_k || gen_n > 32)
                throw Error(ErrorCode::InvalidArgument, "gen requires 1 <= k <= n <= 32");
            const Instance inst = random_instance(gen_n, gen_k, parse_signature(gen_signature, gen_k), gen_seed);
            if (gen_out.empty()) out << instance_to_json(inst).dump(2) << "\n";
            else save_instance(inst, gen_out);
            return kExitOk;
        }

        const ToleranceConfig tol = common.tolerances();

        if (sweep->parsed()) {
            const int n_lo = n_range.front(), n_hi = n_range.back();
            const int k_lo = k_range.front(), k_hi = k_range.back();
            const SignatureMode mode = signatures == "plus"    ? SignatureMode::Plus
                                       : signatures == "minus" ? SignatureMode::Minus
                                                               : SignatureMode::Mixed;
            const auto thetas = theta_grid(theta_count, tol);
            int total = 0, passed = 0, numerical = 0;
            json failures = json::array();
            for (int i = 0; i < seeds; ++i) {
                const std::uint64_t seed = seed_start + static_cast<std::uint64_t>(i);
                const SweepCase c = sweep_case(seed, n_lo, n_hi, k_lo, k_hi, mode);
                const ValidatedInstance vi = validate_instance(c.instance, tol);
                for (const double l : lambda_grid(vi, per_instance, tol)) {
                    ++total;
                    json failure;
                    try {
                        const VerificationRow row = verify_lambda(vi, l, thetas, tol);
                        if (row.equality_holds) {
                            ++passed;
                            continue;
                        }
                        failure["row"] = to_json(row);
                    } catch (const Error& e) {
                        ++numerical;
                        failure["error"] = {{"code", to_string(e.code())}, {"message", e.what()}};
                    }
                    failure["seed"] = seed;
                    failure["lambda"] = l;
                    failure["instance"] = instance_to_json(c.instance);
                    failure["tolerances"] = tolerance_to_json(tol);
                    std::filesystem::create_directories(dump_dir);
                    const std::string path =
                        dump_dir + "/seed" + std::to_string(seed) + "_lambda" + std::to_string(failures.size()) + ".json";
                    std::ofstream f(path);
                    f << failure.dump(2) << "\n";
                    failures.push_back({{"seed", seed}, {"lambda", l}, {"file", path}});
                }
            }
            const double rate = total > 0 ? static_cast<double>(passed) / total : 1.0;
            if (js) {
                out << json{{"cases", total}, {"passed", passed}, {"pass_rate", rate}, {"failures", failures}}.dump(2)
                    << "\n";
            } else {
                out << "cases=" << total << " passed=" << passed << " pass_rate=" << fmt(100.0 * rate) << "%\n";
                for (const auto& f : failures)
                    out << "failure seed=" << f["seed"] << " lambda=" << fmt(f["lambda"].get<double>())
                        << " replay=" << f["file"].get<std::string>() << "\n";
            }
            if (passed == total) return kExitOk;
            return numerical > 0 ? kExitNumerical : kExitInequality;
        }
        const ValidatedInstance inst = validate_instance(load_instance(common.instance_path), tol);
        const CouplingWindow window{window_ab[0], window_ab[1]};

        if (res->parsed()) {
            const auto points = resonance_points(inst, lambda, base, window, tol);
            if (js) {
                json rows = json::array();
                for (const auto& p : points)
                    rows.push_back({{"r", p.location.real()},
                                    {"multiplicity", p.multiplicity},
                                    {"contour_multiplicity", p.contour_multiplicity},
                                    {"cluster_radius", p.cluster_radius}});
                out << json{{"lambda", lambda}, {"window", {window.a, window.b}}, {"points", rows}}.dump(2) << "\n";
            } else {
                out << "r multiplicity\n";
                for (const auto& p : points) out << fmt(p.location.real()) << " " << p.multiplicity << "\n";
            }
            return kExitOk;
        }

        if (ver->parsed()) {
            std::vector<double> grid = lambdas;
            if (lambda_grid_count > 0) {
                grid = lambda_grid(inst, lambda_grid_count, tol);
            } else if (grid.empty()) {
                // Replay files carry their lambda.
                std::ifstream in(common.instance_path);
                json j;
                in >> j;
                if (j.is_object() && j.contains("lambda")) grid.push_back(j["lambda"].get<double>());
            }
            if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "verify needs --lambda or --lambda-grid");
            const bool unit_window = window.a == 0.0 && window.b == 1.0;
            const ValidatedInstance scaled =
                unit_window ? inst : validate_instance(rescale_window(inst.instance, window), tol);
            const auto thetas = theta_grid(theta_count, tol);
            bool all_hold = true;
            json rows = json::array();
            for (const double l : grid) {
                VerificationRow row = verify_lambda(scaled, l, thetas, tol, FlowOptions{samples});
                for (auto& p : row.index.points) p.location = window.a + window.span() * p.location;
                all_hold = all_hold && row.equality_holds;
                if (js) {
                    rows.push_back(to_json(row));
                } else {
                    out << "lambda=" << fmt(l) << " total_index=" << signed_int(row.total_index)
                        << " mu=" << signed_int(row.mu) << " mu_a=" << signed_int(row.mu_a)
                        << " mu_s=" << signed_int(row.mu_s) << " equality=" << (row.equality_holds ? "true" : "false")
                        << " oracle="
                        << (row.oracle_crossings ? signed_int(*row.oracle_crossings) : std::string("n/a")) << "\n";
                }
            }
            if (js)
                out << json{{"window", {window.a, window.b}}, {"rows", rows}, {"all_hold", all_hold}}.dump(2) << "\n";
            return all_hold ? kExitOk : kExitInequality;
        }

        if (mu->parsed()) {
            const FlowResult r = mu_invariant(inst, lambda, theta, tol, FlowOptions{samples});
            if (!trajectory_path.empty()) {
                std::ofstream csv(trajectory_path);
                if (!csv) throw Error(ErrorCode::Io, "cannot write " + trajectory_path);
                write_trajectory_csv(csv, r.trajectory);
            }
            if (js) {
                out << json{{"mu", r.mu},
                            {"theta", r.theta},
                            {"per_track_crossings", r.per_track_crossings},
                            {"det_winding", r.det_winding},
                            {"phase_winding", r.phase_winding_raw},
                            {"y_max", r.y_max},
                            {"samples", r.samples},
                            {"refinement_depth", r.refinement_depth}}
                           .dump(2)
                    << "\n";
            } else {
                out << r.mu << "\n";
            }
            return kExitOk;
        }

        if (sidx->parsed()) {
            const int w = s_index(inst, lambda, y, {center[0], center[1]}, radius, tol);
            if (js) out << json{{"s_index", w}}.dump(2) << "\n";
            else out << w << "\n";
            return kExitOk;
        }

    } catch (const Error& e) {
        report_error(e, js, out, err);
        return exit_code_for(e);
    } catch (const json::exception& e) {
        report_error(Error(ErrorCode::Io, e.what()), js, out, err);
        return kExitNumerical;
    }
    return kExitUsage;
}

}  // namespace resflow
