#pragma once

// Experiment runner: parses a JSON experiment config (strict schema, errors
// carry field paths), dispatches one of six run modes, and persists a
// deterministic artifact bundle — result.json, mode-specific CSV/SVG files,
// and a manifest tying every output to the config hash and module versions.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracheat/calculus.hpp"
#include "fracheat/io.hpp"
#include "fracheat/kernel.hpp"
#include "fracheat/report.hpp"
#include "fracheat/solvability.hpp"
#include "fracheat/solver.hpp"
#include "fracheat/svg.hpp"

namespace fracheat {

// ------------------------------- run modes ---------------------------------

enum class RunMode { Classify, KernelCheck, Evolve, Necessary, Sufficient, Sweep };

inline const char* mode_name(RunMode m) {
    switch (m) {
        case RunMode::Classify: return "classify";
        case RunMode::KernelCheck: return "kernel-check";
        case RunMode::Evolve: return "evolve";
        case RunMode::Necessary: return "necessary";
        case RunMode::Sufficient: return "sufficient";
        case RunMode::Sweep: return "sweep";
    }
    return "?";
}

inline RunMode mode_from_string(const std::string& s) {
    if (s == "classify") return RunMode::Classify;
    if (s == "kernel-check") return RunMode::KernelCheck;
    if (s == "evolve") return RunMode::Evolve;
    if (s == "necessary") return RunMode::Necessary;
    if (s == "sufficient") return RunMode::Sufficient;
    if (s == "sweep") return RunMode::Sweep;
    throw ConfigError("mode", "unknown mode '" + s +
                              "' (expected classify, kernel-check, evolve, necessary, "
                              "sufficient, or sweep)");
}

// ----------------------------- config schema -------------------------------

struct ExperimentConfig {
    RunMode mode = RunMode::Classify;
    int N = 1;
    double theta = 2.0;

    bool has_nonlinearity = false;
    Nonlinearity nl;

    double grid_L = 4.0;
    int grid_M = 256;

    double time_T = 0.5;
    double time_dt = 1.0 / 128.0;

    double solver_tol = 1e-8;
    double solver_cap = 1e8;
    int solver_max_iter = 400;

    std::string initial_type = "profile"; ///< profile | constant | gaussian | ball
    double initial_amplitude = 1.0;
    double initial_width = 1.0;

    bool has_profile = false;
    DCSParams profile;
    double profile_singular_exponent = -1.0; ///< < 0: derived from the family

    double nec_Cstar = 1.0;
    double nec_Tstar = 1.0;
    int nec_points = 16;

    SufficientCheckConfig suff;
    bool suff_beta_set = false;
    bool suff_delta_set = false;

    double sweep_lambda_min = 0.0;
    double sweep_lambda_max = 0.0;
    int sweep_points = 2;
    int sweep_bisections = 6;

    std::string out_dir = "out";

    ordered_json canonical; ///< normalized effective config (hashed, echoed)
};

namespace cfgdetail {

inline void expect_object(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected a JSON object");
}

inline double num_field(const ordered_json& j, const std::string& path, const char* key,
                        double def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(path + "." + key, "expected a number");
    return v.get<double>();
}

inline int int_field(const ordered_json& j, const std::string& path, const char* key,
                     int def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(path + "." + key, "expected an integer");
    return v.get<int>();
}

inline std::string str_field(const ordered_json& j, const std::string& path, const char* key,
                             const std::string& def) {
    if (!j.contains(key)) return def;
    const auto& v = j.at(key);
    if (!v.is_string()) throw ConfigError(path + "." + key, "expected a string");
    return v.get<std::string>();
}

inline void reject_unknown(const ordered_json& j, const std::string& path,
                           std::initializer_list<const char*> known) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError(path.empty() ? item.key() : path + "." + item.key(),
                              "unknown field");
    }
}

inline Nonlinearity parse_nonlinearity(const ordered_json& j) {
    expect_object(j, "nonlinearity");
    reject_unknown(j, "nonlinearity",
                   {"family", "p", "q", "L", "n", "f", "fprime", "tau0", "tau1"});
    const std::string fam = str_field(j, "nonlinearity", "family", "");
    if (fam.empty()) throw ConfigError("nonlinearity.family", "required field is missing");
    const double p = num_field(j, "nonlinearity", "p", 0.0);
    const double q = num_field(j, "nonlinearity", "q", 0.0);
    if (fam == "power") return Nonlinearity::power(p);
    if (fam == "powersum") return Nonlinearity::power_sum(p, q);
    if (fam == "powerlog")
        return Nonlinearity::power_log(p, q, num_field(j, "nonlinearity", "L", 2.0));
    if (fam == "expn")
        return Nonlinearity::exp_family(int_field(j, "nonlinearity", "n", 1), p);
    if (fam == "custom") {
        const std::string f = str_field(j, "nonlinearity", "f", "");
        const std::string fp = str_field(j, "nonlinearity", "fprime", "");
        if (f.empty() || fp.empty())
            throw ConfigError("nonlinearity.f", "custom family requires f and fprime");
        return Nonlinearity::custom(f, fp, num_field(j, "nonlinearity", "tau0", 0.0),
                                    num_field(j, "nonlinearity", "tau1", 0.0));
    }
    throw ConfigError("nonlinearity.family",
                      "unknown family '" + fam +
                          "' (expected power, powersum, powerlog, expn, or custom)");
}

inline DCSKind profile_kind_from_string(const std::string& s) {
    if (s == "power") return DCSKind::Power;
    if (s == "exp") return DCSKind::Exp;
    if (s == "powerlog") return DCSKind::PowerLog;
    if (s == "expn") return DCSKind::ExpN;
    if (s == "generic") return DCSKind::Generic;
    throw ConfigError("profile.kind", "unknown kind '" + s +
                                      "' (expected power, exp, powerlog, expn, or generic)");
}

} // namespace cfgdetail

/// Local power of the profile singularity at the origin: the generator grows
/// like v^{q_f - 1} for power-type families and only logarithmically for the
/// exponential ones.
inline double profile_singular_exponent(const DCSParams& prm, double theta) {
    switch (prm.kind) {
        case DCSKind::Power:
        case DCSKind::PowerLog: return theta / (prm.p - 1.0);
        case DCSKind::Exp:
        case DCSKind::ExpN: return 0.0;
        case DCSKind::Generic: return 0.0; // log-scale unless overridden in config
    }
    return 0.0;
}

/// Strict parse: unknown keys and wrong types are rejected with field paths;
/// numeric invariants are validated up front.
inline ExperimentConfig parse_experiment(const ordered_json& j) {
    cfgdetail::expect_object(j, "");
    cfgdetail::reject_unknown(j, "",
                              {"mode", "N", "theta", "nonlinearity", "grid", "time", "solver",
                               "initial", "profile", "necessary", "sufficient", "sweep",
                               "out"});
    ExperimentConfig cfg;
    const std::string mode = cfgdetail::str_field(j, "", "mode", "");
    if (mode.empty()) throw ConfigError("mode", "required field is missing");
    cfg.mode = mode_from_string(mode);

    cfg.N = cfgdetail::int_field(j, "", "N", 1);
    if (cfg.N < 1 || cfg.N > 3) throw ConfigError("N", "dimension must be 1, 2, or 3");
    cfg.theta = cfgdetail::num_field(j, "", "theta", 2.0);
    if (!(cfg.theta > 0.0) || cfg.theta > 2.0)
        throw ConfigError("theta", "order must lie in (0, 2]");

    if (j.contains("nonlinearity")) {
        cfg.nl = cfgdetail::parse_nonlinearity(j.at("nonlinearity"));
        cfg.has_nonlinearity = true;
    }

    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        cfgdetail::expect_object(g, "grid");
        cfgdetail::reject_unknown(g, "grid", {"L", "M"});
        cfg.grid_L = cfgdetail::num_field(g, "grid", "L", cfg.grid_L);
        cfg.grid_M = cfgdetail::int_field(g, "grid", "M", cfg.grid_M);
    }
    if (!(cfg.grid_L > 0.0)) throw ConfigError("grid.L", "half width must be positive");
    if (cfg.grid_M < 2 || (cfg.grid_M & (cfg.grid_M - 1)) != 0)
        throw ConfigError("grid.M", "points per axis must be a power of two >= 2");

    if (j.contains("time")) {
        const auto& t = j.at("time");
        cfgdetail::expect_object(t, "time");
        cfgdetail::reject_unknown(t, "time", {"T", "dt"});
        cfg.time_T = cfgdetail::num_field(t, "time", "T", cfg.time_T);
        cfg.time_dt = cfgdetail::num_field(t, "time", "dt", cfg.time_dt);
    }
    if (!(cfg.time_T > 0.0)) throw ConfigError("time.T", "horizon must be positive");
    if (!(cfg.time_dt > 0.0) || cfg.time_dt > cfg.time_T)
        throw ConfigError("time.dt", "step must lie in (0, T]");

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        cfgdetail::expect_object(s, "solver");
        cfgdetail::reject_unknown(s, "solver", {"tol", "cap", "max_iter"});
        cfg.solver_tol = cfgdetail::num_field(s, "solver", "tol", cfg.solver_tol);
        cfg.solver_cap = cfgdetail::num_field(s, "solver", "cap", cfg.solver_cap);
        cfg.solver_max_iter = cfgdetail::int_field(s, "solver", "max_iter", cfg.solver_max_iter);
    }
    if (!(cfg.solver_tol > 0.0)) throw ConfigError("solver.tol", "tolerance must be positive");
    if (!(cfg.solver_cap > 0.0)) throw ConfigError("solver.cap", "cap must be positive");
    if (cfg.solver_max_iter < 1) throw ConfigError("solver.max_iter", "needs at least one iteration");

    if (j.contains("initial")) {
        const auto& s = j.at("initial");
        cfgdetail::expect_object(s, "initial");
        cfgdetail::reject_unknown(s, "initial", {"type", "amplitude", "width"});
        cfg.initial_type = cfgdetail::str_field(s, "initial", "type", cfg.initial_type);
        cfg.initial_amplitude = cfgdetail::num_field(s, "initial", "amplitude", 1.0);
        cfg.initial_width = cfgdetail::num_field(s, "initial", "width", 1.0);
    }
    if (cfg.initial_type != "profile" && cfg.initial_type != "constant" &&
        cfg.initial_type != "gaussian" && cfg.initial_type != "ball")
        throw ConfigError("initial.type",
                          "unknown type '" + cfg.initial_type +
                              "' (expected profile, constant, gaussian, or ball)");
    if (cfg.initial_type != "profile") {
        if (!(cfg.initial_amplitude >= 0.0))
            throw ConfigError("initial.amplitude", "amplitude must be nonnegative");
        if (!(cfg.initial_width > 0.0))
            throw ConfigError("initial.width", "width must be positive");
    }

    if (j.contains("profile")) {
        const auto& p = j.at("profile");
        cfgdetail::expect_object(p, "profile");
        cfgdetail::reject_unknown(p, "profile",
                                  {"kind", "lambda", "p", "q", "n", "cutoff_r",
                                   "singular_exponent"});
        const std::string kind = cfgdetail::str_field(p, "profile", "kind", "");
        if (kind.empty()) throw ConfigError("profile.kind", "required field is missing");
        cfg.profile.kind = cfgdetail::profile_kind_from_string(kind);
        cfg.profile.lambda = cfgdetail::num_field(p, "profile", "lambda", 1.0);
        cfg.profile.p = cfgdetail::num_field(p, "profile", "p", 0.0);
        cfg.profile.q = cfgdetail::num_field(p, "profile", "q", 0.0);
        cfg.profile.n = cfgdetail::int_field(p, "profile", "n", 1);
        cfg.profile.cutoff_r = cfgdetail::num_field(p, "profile", "cutoff_r", kInf);
        cfg.profile.theta = cfg.theta;
        cfg.profile_singular_exponent =
            cfgdetail::num_field(p, "profile", "singular_exponent", -1.0);
        cfg.has_profile = true;
    }

    if (j.contains("necessary")) {
        const auto& n = j.at("necessary");
        cfgdetail::expect_object(n, "necessary");
        cfgdetail::reject_unknown(n, "necessary", {"Cstar", "Tstar", "points"});
        cfg.nec_Cstar = cfgdetail::num_field(n, "necessary", "Cstar", cfg.nec_Cstar);
        cfg.nec_Tstar = cfgdetail::num_field(n, "necessary", "Tstar", cfg.nec_Tstar);
        cfg.nec_points = cfgdetail::int_field(n, "necessary", "points", cfg.nec_points);
    }
    if (cfg.nec_points < 1) throw ConfigError("necessary.points", "needs at least one time");

    if (j.contains("sufficient")) {
        const auto& s = j.at("sufficient");
        cfgdetail::expect_object(s, "sufficient");
        cfgdetail::reject_unknown(s, "sufficient",
                                  {"beta", "delta", "eps", "T", "tau_star", "kappa"});
        if (s.contains("beta")) {
            cfg.suff.beta = cfgdetail::num_field(s, "sufficient", "beta", 0.0);
            cfg.suff_beta_set = true;
        }
        if (s.contains("delta")) {
            cfg.suff.delta = cfgdetail::num_field(s, "sufficient", "delta", 0.0);
            cfg.suff_delta_set = true;
        }
        cfg.suff.eps = cfgdetail::num_field(s, "sufficient", "eps", cfg.suff.eps);
        cfg.suff.T = cfgdetail::num_field(s, "sufficient", "T", cfg.suff.T);
        cfg.suff.tau_star = cfgdetail::num_field(s, "sufficient", "tau_star", cfg.suff.tau_star);
        cfg.suff.kappa = cfgdetail::num_field(s, "sufficient", "kappa", cfg.suff.kappa);
    }

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        cfgdetail::expect_object(s, "sweep");
        cfgdetail::reject_unknown(s, "sweep",
                                  {"lambda_min", "lambda_max", "points", "bisections"});
        cfg.sweep_lambda_min = cfgdetail::num_field(s, "sweep", "lambda_min", 0.0);
        cfg.sweep_lambda_max = cfgdetail::num_field(s, "sweep", "lambda_max", 0.0);
        cfg.sweep_points = cfgdetail::int_field(s, "sweep", "points", cfg.sweep_points);
        cfg.sweep_bisections = cfgdetail::int_field(s, "sweep", "bisections", cfg.sweep_bisections);
    }

    cfg.out_dir = cfgdetail::str_field(j, "", "out", cfg.out_dir);
    if (cfg.out_dir.empty()) throw ConfigError("out", "output directory must be nonempty");

    // mode-specific requirements
    const bool needs_nl = cfg.mode != RunMode::KernelCheck;
    if (needs_nl && !cfg.has_nonlinearity)
        throw ConfigError("nonlinearity", "required for mode " + std::string(mode_name(cfg.mode)));
    const bool needs_profile = cfg.mode == RunMode::Sweep || cfg.mode == RunMode::Sufficient ||
                               ((cfg.mode == RunMode::Evolve || cfg.mode == RunMode::Necessary) &&
                                cfg.initial_type == "profile");
    if (needs_profile && !cfg.has_profile)
        throw ConfigError("profile", "required for mode " + std::string(mode_name(cfg.mode)) +
                                         (cfg.initial_type == "profile"
                                              ? " with initial.type = profile"
                                              : ""));
    if (cfg.mode == RunMode::Sweep) {
        if (!(cfg.sweep_lambda_min > 0.0))
            throw ConfigError("sweep.lambda_min", "must be positive");
        if (!(cfg.sweep_lambda_min < cfg.sweep_lambda_max))
            throw ConfigError("sweep.lambda_max", "requires lambda_min < lambda_max");
        if (cfg.sweep_points < 2) throw ConfigError("sweep.points", "needs at least two");
        if (cfg.sweep_bisections < 0)
            throw ConfigError("sweep.bisections", "must be nonnegative");
    }

    // normalized echo of every effective value (basis of the config hash)
    ordered_json c;
    c["mode"] = mode_name(cfg.mode);
    c["N"] = cfg.N;
    c["theta"] = cfg.theta;
    if (cfg.has_nonlinearity) {
        ordered_json n;
        n["family"] = family_name(cfg.nl.family);
        switch (cfg.nl.family) {
            case Family::Power: n["p"] = cfg.nl.p; break;
            case Family::PowerSum:
                n["p"] = cfg.nl.p;
                n["q"] = cfg.nl.q;
                break;
            case Family::PowerLog:
                n["p"] = cfg.nl.p;
                n["q"] = cfg.nl.q;
                n["L"] = cfg.nl.L;
                break;
            case Family::ExpN:
                n["n"] = cfg.nl.n;
                n["p"] = cfg.nl.p;
                break;
            case Family::Custom:
                n["f"] = cfgdetail::str_field(j.at("nonlinearity"), "nonlinearity", "f", "");
                n["fprime"] =
                    cfgdetail::str_field(j.at("nonlinearity"), "nonlinearity", "fprime", "");
                n["tau0"] = cfg.nl.tau0;
                n["tau1"] = cfg.nl.tau1;
                break;
        }
        c["nonlinearity"] = std::move(n);
    }
    c["grid"] = {{"L", cfg.grid_L}, {"M", cfg.grid_M}};
    c["time"] = {{"T", cfg.time_T}, {"dt", cfg.time_dt}};
    c["solver"] = {{"tol", cfg.solver_tol},
                   {"cap", cfg.solver_cap},
                   {"max_iter", cfg.solver_max_iter}};
    c["initial"] = {{"type", cfg.initial_type},
                    {"amplitude", cfg.initial_amplitude},
                    {"width", cfg.initial_width}};
    if (cfg.has_profile) {
        c["profile"] = {{"kind", dcs_kind_name(cfg.profile.kind)},
                        {"lambda", cfg.profile.lambda},
                        {"p", cfg.profile.p},
                        {"q", cfg.profile.q},
                        {"n", cfg.profile.n},
                        {"cutoff_r", std::isfinite(cfg.profile.cutoff_r)
                                         ? ordered_json(cfg.profile.cutoff_r)
                                         : ordered_json("inf")},
                        {"singular_exponent", cfg.profile_singular_exponent}};
    }
    c["necessary"] = {{"Cstar", cfg.nec_Cstar},
                      {"Tstar", cfg.nec_Tstar},
                      {"points", cfg.nec_points}};
    c["sufficient"] = {{"beta", cfg.suff_beta_set ? ordered_json(cfg.suff.beta)
                                                  : ordered_json("auto")},
                       {"delta", cfg.suff_delta_set ? ordered_json(cfg.suff.delta)
                                                    : ordered_json("auto")},
                       {"eps", cfg.suff.eps},
                       {"T", cfg.suff.T},
                       {"tau_star", cfg.suff.tau_star},
                       {"kappa", cfg.suff.kappa}};
    c["sweep"] = {{"lambda_min", cfg.sweep_lambda_min},
                  {"lambda_max", cfg.sweep_lambda_max},
                  {"points", cfg.sweep_points},
                  {"bisections", cfg.sweep_bisections}};
    // `out` stays outside the canonical form: artifacts must not depend on
    // where they are written, so relocated reruns stay byte-identical.
    cfg.canonical = std::move(c);
    return cfg;
}

inline std::string config_hash(const ExperimentConfig& cfg) {
    return hex64(fnv1a(cfg.canonical.dump()));
}

// ------------------------------ initial data -------------------------------

struct InitialData {
    std::function<double(double)> radial; ///< value at radius r >= 0
    SingularityMark mark;
};

inline InitialData make_initial(const ExperimentConfig& cfg, const Calculus* calc) {
    InitialData init;
    if (cfg.initial_type == "constant") {
        const double a = cfg.initial_amplitude;
        init.radial = [a](double) { return a; };
    } else if (cfg.initial_type == "gaussian") {
        const double a = cfg.initial_amplitude, w = cfg.initial_width;
        init.radial = [a, w](double r) { return a * std::exp(-(r * r) / (w * w)); };
    } else if (cfg.initial_type == "ball") {
        const double a = cfg.initial_amplitude, w = cfg.initial_width;
        init.radial = [a, w](double r) { return r <= w ? a : 0.0; };
    } else { // profile
        DCSSpec spec;
        if (cfg.profile.kind == DCSKind::Generic) {
            if (calc == nullptr)
                throw ConfigError("profile.kind",
                                  "generic profiles need the nonlinearity calculus");
            spec = make_dcs(*calc, cfg.profile);
        } else {
            spec = make_dcs(cfg.profile);
        }
        init.radial = [spec](double r) { return spec.mu(r); };
        init.mark.present = true;
        init.mark.exponent = cfg.profile_singular_exponent >= 0.0
                                 ? cfg.profile_singular_exponent
                                 : profile_singular_exponent(cfg.profile, cfg.theta);
    }
    return init;
}

inline GridField discretize_initial(const InitialData& init, int dim, double L, int M) {
    if (dim == 1)
        return discretize(
            L, M, [&](double x) { return init.radial(std::abs(x)); }, 0.0, init.mark);
    return discretize(
        dim, L, M,
        [&](std::array<double, 3> x) {
            double r2 = 0.0;
            for (int d = 0; d < dim; ++d) r2 += x[d] * x[d];
            return init.radial(std::sqrt(r2));
        },
        0.0, init.mark);
}

// ------------------------------ run artifacts ------------------------------

struct RunArtifacts {
    int exit_code = 0;             ///< 0 = success, 3 = numerical failure
    ordered_json result;           ///< contents of result.json
    std::vector<std::string> files; ///< files written, relative to out_dir
    std::string out_dir;
    std::string summary;           ///< one line for the terminal
};

inline const std::vector<std::pair<std::string, std::string>>& module_versions() {
    static const std::vector<std::pair<std::string, std::string>> v = {
        {"calculus", "1.0.0"},  {"kernel", "1.0.0"}, {"grid", "1.0.0"},
        {"semigroup", "1.0.0"}, {"solver", "1.0.0"}, {"solvability", "1.0.0"},
        {"io", "1.0.0"},        {"cli", "1.0.0"}};
    return v;
}

/// Serializes possibly infinite quantities (JSON has no inf literal).
inline ordered_json json_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

namespace labdetail {

inline std::string error_code_name(const Error& e) {
    if (dynamic_cast<const NonMonotoneSweepError*>(&e)) return "non_monotone_sweep";
    if (dynamic_cast<const BracketFailureError*>(&e)) return "bracket_failure";
    if (dynamic_cast<const BetaWindowEmptyError*>(&e)) return "beta_window_empty";
    if (dynamic_cast<const NonIntegrableSingularityError*>(&e)) return "non_integrable_singularity";
    if (dynamic_cast<const QuadratureFailureError*>(&e)) return "quadrature_failure";
    if (dynamic_cast<const TailDivergentError*>(&e)) return "tail_divergent";
    if (dynamic_cast<const NoLimitError*>(&e)) return "no_limit";
    if (dynamic_cast<const NonMonotoneError*>(&e)) return "non_monotone";
    if (dynamic_cast<const BoundViolationError*>(&e)) return "bound_violation";
    if (dynamic_cast<const WindowTooSmallError*>(&e)) return "window_too_small";
    if (dynamic_cast<const NotBlowingUpError*>(&e)) return "not_blowing_up";
    if (dynamic_cast<const DomainError*>(&e)) return "domain";
    if (dynamic_cast<const IoError*>(&e)) return "io";
    if (dynamic_cast<const ConfigError*>(&e)) return "config";
    return "error";
}

inline void write_text(const std::filesystem::path& dir, const std::string& name,
                       const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + (dir / name).string());
    out << content;
    if (!out) throw IoError("write failed: " + (dir / name).string());
}

// ---- mode bodies (each fills artifacts.result and queues extra files) ----

struct ExtraFile {
    std::string name;
    std::string content;
};

inline void run_classify(const ExperimentConfig& cfg, ordered_json& r) {
    const Calculus c = build_calculus(cfg.nl);
    r["q_f"] = json_num(c.q_f);
    r["p_f"] = json_num(c.p_f);
    r["p_theta"] = critical_exponent(cfg.N, cfg.theta);
    r["criticality"] = criticality_name(classify(c, cfg.N, cfg.theta));
    r["F0"] = json_num(c.F0);
    r["G0"] = c.G0;
    r["qf_from_closed_form"] = c.qf_from_closed_form;
    if (!c.qf_from_closed_form)
        r["qf_estimate"] = {{"q_hat", c.qf_estimate.q_hat},
                            {"converged", c.qf_estimate.converged},
                            {"spread", c.qf_estimate.spread},
                            {"method", c.qf_estimate.method}};
}

inline void run_kernel_check(const ExperimentConfig& cfg, ordered_json& r) {
    const KernelTable k = cached_kernel(cfg.N, cfg.theta);
    const double m = k.mass();
    r["mass"] = m;
    r["mass_error"] = std::abs(m - 1.0);
    r["gamma0"] = k.gamma0;
    r["tail_coeff"] = {k.tail_c1, k.tail_c2, k.tail_c3};
    r["table_points"] = k.log_r.size();
}

inline void run_evolve(const ExperimentConfig& cfg, const std::string& hash, ordered_json& r,
                       std::vector<ExtraFile>& extra) {
    const Calculus c = build_calculus(cfg.nl);
    const InitialData init = make_initial(cfg, &c);
    const GridField u0 = discretize_initial(init, cfg.N, cfg.grid_L, cfg.grid_M);
    const KernelTable k = cached_kernel(cfg.N, cfg.theta);

    MildSolveOptions opt;
    opt.max_iter = cfg.solver_max_iter;
    opt.store_trajectory = false;
    opt.rediscretize = [init, &cfg](int factor) {
        return discretize_initial(init, cfg.N, cfg.grid_L, cfg.grid_M * factor);
    };
    const MildSolveReport rep = mild_solve(k, cfg.nl, u0, cfg.time_T, cfg.time_dt,
                                           cfg.solver_tol, cfg.solver_cap, opt);
    r["solve"] = solve_report_to_json(rep);
    extra.push_back({"evolve.svg", render_evolve_svg(rep, hash)});
}

inline void run_necessary(const ExperimentConfig& cfg, ordered_json& r) {
    const Calculus c = build_calculus(cfg.nl);
    const InitialData init = make_initial(cfg, &c);
    const GridField u0 = discretize_initial(init, cfg.N, cfg.grid_L, cfg.grid_M);
    const KernelTable k = cached_kernel(cfg.N, cfg.theta);

    std::vector<double> t_grid(static_cast<std::size_t>(cfg.nec_points));
    for (int i = 0; i < cfg.nec_points; ++i)
        t_grid[i] = cfg.nec_Tstar * double(i + 1) / double(cfg.nec_points);
    const SolvabilityVerdict v =
        check_necessary(k, c, u0, cfg.nec_Cstar, cfg.nec_Tstar, t_grid);
    r["check"] = solvability_to_json(v);
    r["u0_hash"] = hex64(content_hash(u0));
}

inline void run_sufficient(const ExperimentConfig& cfg, ordered_json& r) {
    const Calculus c = build_calculus(cfg.nl);
    SufficientCheckConfig scc = cfg.suff;
    if (!cfg.suff_beta_set) {
        const double lo = c.q_f - 1.0;
        const double hi = std::min(c.q_f, double(cfg.N) / cfg.theta);
        if (!(lo < hi))
            throw BetaWindowEmptyError("sufficient: no admissible beta for q_f = " +
                                       std::to_string(c.q_f));
        scc.beta = 0.5 * (lo + hi);
    }
    if (!cfg.suff_delta_set) scc.delta = 0.5 * (1.0 + scc.beta - c.q_f);

    const InitialData init = make_initial(cfg, &c);
    const SolvabilityVerdict v =
        check_sufficient(cfg.nl, c, init.radial, cfg.N, cfg.theta, scc);
    r["check"] = solvability_to_json(v);
}

inline void run_sweep(const ExperimentConfig& cfg, const std::string& hash, ordered_json& r,
                      std::vector<ExtraFile>& extra) {
    const Calculus c = build_calculus(cfg.nl);
    const KernelTable k = cached_kernel(cfg.N, cfg.theta);

    LambdaSweepConfig sc;
    sc.lambdas.resize(static_cast<std::size_t>(cfg.sweep_points));
    for (int i = 0; i < cfg.sweep_points; ++i)
        sc.lambdas[i] = cfg.sweep_lambda_min *
                        std::pow(cfg.sweep_lambda_max / cfg.sweep_lambda_min,
                                 double(i) / double(cfg.sweep_points - 1));
    sc.bisection_steps = cfg.sweep_bisections;
    sc.T = cfg.time_T;
    sc.dt = cfg.time_dt;
    sc.tol = cfg.solver_tol;
    sc.cap = cfg.solver_cap;
    sc.half_width = cfg.grid_L;
    sc.points = cfg.grid_M;
    sc.dim = cfg.N;
    sc.max_iter = cfg.solver_max_iter;
    sc.singular_exponent = cfg.profile_singular_exponent >= 0.0
                               ? cfg.profile_singular_exponent
                               : profile_singular_exponent(cfg.profile, cfg.theta);

    DCSParams base = cfg.profile;
    auto family = [&](double lambda) {
        DCSParams p = base;
        p.lambda = lambda;
        return base.kind == DCSKind::Generic ? make_dcs(c, p) : make_dcs(p);
    };
    const LambdaBracket bracket = bracket_lambda0(k, cfg.nl, family, sc);

    r["bracket"] = bracket_to_json(bracket);
    extra.push_back({"sweep.csv", sweep_csv_text(bracket.rows, hash)});
    extra.push_back({"sweep.svg", render_sweep_svg(bracket, hash)});
}

} // namespace labdetail

/// Executes the configured experiment and writes the artifact bundle into
/// `out_dir`: result.json, any mode-specific CSV/SVG files, and manifest.json
/// listing every output with its byte count and content hash.  Numerical
/// failures (monotonicity violations, divergent integrals, ...) still produce
/// a result/manifest pair describing the failure and set exit code 3;
/// configuration problems propagate as ConfigError.
inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    RunArtifacts art;
    art.out_dir = cfg.out_dir;
    const std::string hash = config_hash(cfg);

    ordered_json r;
    r["mode"] = mode_name(cfg.mode);
    r["config_hash"] = hash;

    std::vector<labdetail::ExtraFile> extra;
    try {
        switch (cfg.mode) {
            case RunMode::Classify: labdetail::run_classify(cfg, r); break;
            case RunMode::KernelCheck: labdetail::run_kernel_check(cfg, r); break;
            case RunMode::Evolve: labdetail::run_evolve(cfg, hash, r, extra); break;
            case RunMode::Necessary: labdetail::run_necessary(cfg, r); break;
            case RunMode::Sufficient: labdetail::run_sufficient(cfg, r); break;
            case RunMode::Sweep: labdetail::run_sweep(cfg, hash, r, extra); break;
        }
    } catch (const ConfigError&) {
        throw; // configuration problems are the caller's to report (exit 2)
    } catch (const Error& e) {
        r["error"] = {{"type", labdetail::error_code_name(e)}, {"message", e.what()}};
        art.exit_code = 3;
        extra.clear(); // partial plots would not be reproducible
    }
    art.result = r;

    const std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    // single-writer funnel: result first, then mode files, manifest last
    std::vector<std::pair<std::string, std::string>> outputs;
    outputs.emplace_back("result.json", r.dump(2) + "\n");
    for (auto& e : extra) outputs.emplace_back(e.name, std::move(e.content));

    ordered_json manifest;
    manifest["schema"] = "run-manifest/1";
    manifest["config_hash"] = hash;
    manifest["mode"] = mode_name(cfg.mode);
    manifest["exit_code"] = art.exit_code;
    ordered_json versions;
    for (const auto& [name, ver] : module_versions()) versions[name] = ver;
    manifest["versions"] = std::move(versions);
    ordered_json listed = ordered_json::array();
    for (const auto& [name, content] : outputs) {
        labdetail::write_text(dir, name, content);
        art.files.push_back(name);
        listed.push_back({{"file", name},
                          {"bytes", content.size()},
                          {"hash", hex64(fnv1a(content))}});
    }
    manifest["outputs"] = std::move(listed);
    manifest["config"] = cfg.canonical;
    labdetail::write_text(dir, "manifest.json", manifest.dump(2) + "\n");
    art.files.push_back("manifest.json");

    // terminal one-liner
    if (art.exit_code != 0) {
        art.summary = std::string(mode_name(cfg.mode)) + ": failed (" +
                      r["error"]["type"].get<std::string>() + ")";
    } else {
        switch (cfg.mode) {
            case RunMode::Classify:
                art.summary = "classify: " + r["criticality"].get<std::string>();
                break;
            case RunMode::KernelCheck:
                art.summary =
                    "kernel-check: mass error " + full_precision(r["mass_error"].get<double>());
                break;
            case RunMode::Evolve:
                art.summary = "evolve: " + r["solve"]["verdict"].get<std::string>();
                break;
            case RunMode::Necessary:
            case RunMode::Sufficient:
                art.summary = std::string(mode_name(cfg.mode)) + ": " +
                              r["check"]["kind"].get<std::string>();
                break;
            case RunMode::Sweep:
                art.summary = "sweep: bracket [" +
                              full_precision(r["bracket"]["lambda_lo"].get<double>()) + ", " +
                              full_precision(r["bracket"]["lambda_hi"].get<double>()) + "]";
                break;
        }
    }
    return art;
}

} // namespace fracheat
