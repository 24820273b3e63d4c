#pragma once

// Checkable existence / nonexistence conditions for the semilinear integral
// equation, and construction of dilation-critical singular profiles.
//
// Profiles take the form mu_lambda(x) = psi(lambda |x|^{-theta}) where psi is
// the zero-extended inverse of the growth function G (or a closed-form
// asymptotic stand-in for the classical families).  The checks implemented
// here are:
//
//   * pointwise:  G(mu(x)) >= gamma |x|^{-theta}  (certifies nonexistence)
//                 G(mu(x)) <= eps   |x|^{-theta}  (certifies existence)
//   * necessary:  F([S(t)mu](x)) >= Cstar * t for small t — a violation
//                 witnesses nonexistence for the supplied constant
//   * sufficient: beta <= f'(u)F(u) <= 1 + beta - delta on a tail, plus
//                 sup_x avg_{B(x,sigma)} G(mu)^beta <= eps sigma^{-beta theta}
//
// plus an empirical bracket for the dilation threshold lambda0 via verdict-
// monotone solver sweeps.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fracheat/calculus.hpp"
#include "fracheat/errors.hpp"
#include "fracheat/grid.hpp"
#include "fracheat/kernel.hpp"
#include "fracheat/nonlinearity.hpp"
#include "fracheat/quadrature.hpp"
#include "fracheat/semigroup.hpp"
#include "fracheat/solver.hpp"

namespace fracheat {

// ======================= singular profile construction =======================

enum class DCSKind { Generic, Power, Exp, PowerLog, ExpN };

inline const char* dcs_kind_name(DCSKind k) {
    switch (k) {
        case DCSKind::Generic: return "generic";
        case DCSKind::Power: return "power";
        case DCSKind::Exp: return "exp";
        case DCSKind::PowerLog: return "powerlog";
        case DCSKind::ExpN: return "expn";
    }
    return "?";
}

/// A dilation family of radial initial data mu_lambda(x) = psi(lambda
/// |x|^{-theta}), zero beyond cutoff_r.  psi is nondecreasing and vanishes at
/// or below inner_threshold, making the profile radially nonincreasing.
struct DCSSpec {
    DCSKind kind = DCSKind::Generic;
    double theta = 2.0;
    double lambda = 1.0;
    double cutoff_r = kInf;       ///< profile forced to zero beyond this radius
    double inner_threshold = 0.0; ///< psi(v) = 0 for v <= this
    std::function<double(double)> psi; ///< zero-extended generator, v >= 0
    std::function<double(double)> phi; ///< asymptotic partner: phi(psi(u)) ~ u
    int n = 0;                    ///< iterated-exponential depth (ExpN)
    double p = 0.0, q = 0.0;      ///< family exponents
    std::string warning;          ///< set when a requested cutoff was shrunk

    /// Radial evaluation; r = 0 returns +inf (the monotone limit).
    [[nodiscard]] double mu(double r) const {
        if (r > cutoff_r) return 0.0;
        if (!(r > 0.0)) return kInf;
        const double v = lambda * std::pow(r, -theta);
        if (!std::isfinite(v)) return kInf;
        if (v <= inner_threshold) return 0.0;
        return psi(v);
    }
};

struct DCSParams {
    DCSKind kind = DCSKind::Generic;
    double theta = 2.0;
    double lambda = 1.0;
    double cutoff_r = kInf; ///< requested cutoff; shrunk to the support radius
    double p = 0.0;         ///< Power / PowerLog / ExpN exponent
    double q = 0.0;         ///< PowerLog log-exponent
    int n = 1;              ///< ExpN depth
};

namespace detail {

/// A(v) = v (log_n v)^{1/p} / prod_{k=1}^n log_k v for v > e_n.
inline double iterated_log_A(int n, double p, double v) {
    double denom = 1.0, w = v;
    for (int k = 1; k <= n; ++k) {
        w = std::log(w); // log_k v
        denom *= w;
    }
    if (!(w > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return v * std::pow(w, 1.0 / p) / denom;
}

/// Smallest v from which A exceeds e_n on an increasing branch, so that
/// (log_n A(v))^{1/p} is a positive increasing profile generator.  Returns
/// exactly e_n when A is admissible from the domain edge onward.
inline double iterated_log_threshold(int n, double p) {
    const double en = exp_n(n, 0.0);
    auto admissible = [&](double v) {
        const double a0 = iterated_log_A(n, p, v);
        const double a1 = iterated_log_A(n, p, v * (1.0 + 1e-7));
        return a0 > en && a1 > a0;
    };
    const double v0 = en * (1.0 + 1e-6);
    if (admissible(v0)) return en;
    double lo = v0, hi = v0;
    const double step = std::pow(2.0, 0.125);
    bool found = false;
    for (int i = 0; i < 4000; ++i) {
        hi *= step;
        if (admissible(hi)) {
            found = true;
            break;
        }
        lo = hi;
    }
    if (!found)
        throw DomainError("iterated-log profile has no increasing branch for n = " +
                          std::to_string(n) + ", p = " + std::to_string(p));
    for (int i = 0; i < 120; ++i) {
        const double mid = std::sqrt(lo * hi);
        (admissible(mid) ? hi : lo) = mid;
    }
    return hi;
}

inline void finish_dcs(DCSSpec& s, double requested_cutoff) {
    const double natural =
        s.inner_threshold > 0.0
            ? std::pow(s.lambda / s.inner_threshold, 1.0 / s.theta)
            : kInf;
    s.cutoff_r = std::min(requested_cutoff, natural);
    if (std::isfinite(requested_cutoff) && requested_cutoff > natural * (1.0 + 1e-12))
        s.warning = "cutoff shrunk from " + std::to_string(requested_cutoff) + " to " +
                    std::to_string(natural) + ": the generator vanishes outside it";
}

inline void validate_dcs_common(const DCSParams& prm) {
    if (!(prm.theta > 0.0) || prm.theta > 2.0)
        throw ConfigError("dcs.theta", "requires 0 < theta <= 2");
    if (!(prm.lambda > 0.0)) throw ConfigError("dcs.lambda", "requires lambda > 0");
    if (!(prm.cutoff_r > 0.0)) throw ConfigError("dcs.cutoff_r", "requires cutoff_r > 0");
}

} // namespace detail

/// Closed-form profile families.
inline DCSSpec make_dcs(const DCSParams& prm) {
    detail::validate_dcs_common(prm);
    DCSSpec s;
    s.kind = prm.kind;
    s.theta = prm.theta;
    s.lambda = prm.lambda;
    s.n = prm.n;
    s.p = prm.p;
    s.q = prm.q;

    switch (prm.kind) {
        case DCSKind::Power: {
            // f = u^p: G(u) = (p-1) u^{p-1}, inverse c_p v^{1/(p-1)}
            if (!(prm.p > 1.0)) throw ConfigError("dcs.p", "power profile requires p > 1");
            const double p = prm.p;
            const double cp = std::pow(p - 1.0, -1.0 / (p - 1.0));
            s.inner_threshold = 0.0;
            s.psi = [cp, p](double v) {
                return v <= 0.0 ? 0.0 : cp * std::pow(v, 1.0 / (p - 1.0));
            };
            s.phi = [p](double u) {
                return u <= 0.0 ? 0.0 : (p - 1.0) * std::pow(u, p - 1.0);
            };
            break;
        }
        case DCSKind::Exp: {
            // f = e^u: G(u) = e^u exactly, inverse log v above 1
            s.inner_threshold = 1.0;
            s.psi = [](double v) { return v <= 1.0 ? 0.0 : std::log(v); };
            s.phi = [](double u) { return u <= 0.0 ? 0.0 : std::exp(u); };
            break;
        }
        case DCSKind::PowerLog: {
            // f' ~ u^{p-1} (log u)^q: inverse pair
            //   phi0(u) = u^{p-1} (log u)^q,  psi0(v) = v^{1/(p-1)} (log v)^{-q/(p-1)}
            // psi0 is positive and increasing for v > e^{max(q,0)}
            if (!(prm.p > 1.0))
                throw ConfigError("dcs.p", "powerlog profile requires p > 1");
            const double p = prm.p, q = prm.q;
            const double L = std::exp(std::max(q, 0.0));
            s.inner_threshold = L;
            s.psi = [p, q, L](double v) {
                if (v <= L) return 0.0;
                return std::pow(v, 1.0 / (p - 1.0)) *
                       std::pow(std::log(v), -q / (p - 1.0));
            };
            s.phi = [p, q](double u) {
                if (u <= 1.0) return 0.0;
                return std::pow(u, p - 1.0) * std::pow(std::log(u), q);
            };
            break;
        }
        case DCSKind::ExpN: {
            // f = exp_n(u^p): psi0(v) = (log_n A(v))^{1/p} with
            // A(v) = v (log_n v)^{1/p} / prod_k log_k v
            if (prm.n < 1) throw ConfigError("dcs.n", "expn profile requires n >= 1");
            if (!(prm.p > 0.0)) throw ConfigError("dcs.p", "expn profile requires p > 0");
            const int n = prm.n;
            const double p = prm.p;
            const double L = detail::iterated_log_threshold(n, p);
            const double en = exp_n(n, 0.0);
            s.inner_threshold = L;
            s.psi = [n, p, L, en](double v) {
                if (v <= L) return 0.0;
                const double a = detail::iterated_log_A(n, p, v);
                if (!(a > en)) return 0.0;
                return std::pow(log_n(n, a), 1.0 / p);
            };
            s.phi = [n, p](double u) {
                if (u <= 0.0) return 0.0;
                const double w = std::pow(u, p);
                double prod = std::pow(u, p - 1.0);
                double e = w;
                for (int k = 1; k <= n; ++k) {
                    e = std::exp(e);
                    prod *= e;
                    if (std::isinf(prod)) return kInf;
                }
                return prod;
            };
            break;
        }
        case DCSKind::Generic:
            throw ConfigError("dcs.kind",
                              "generic profiles need the calculus overload of make_dcs");
    }
    detail::finish_dcs(s, prm.cutoff_r);
    return s;
}

/// Generic profile: psi is the zero-extended inverse of G from the calculus.
inline DCSSpec make_dcs(const Calculus& c, const DCSParams& prm) {
    detail::validate_dcs_common(prm);
    DCSSpec s;
    s.kind = DCSKind::Generic;
    s.theta = prm.theta;
    s.lambda = prm.lambda;
    s.inner_threshold = c.G0;
    s.psi = [c](double v) { return c.psi(v); };
    s.phi = [c](double u) { return c.G(u); };
    detail::finish_dcs(s, prm.cutoff_r);
    return s;
}

/// Surface measure of the unit sphere in R^N (N <= 3).
inline double sphere_measure(int N) {
    switch (N) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
    }
    throw ConfigError("dcs.dim", "supported dimensions are 1, 2, 3");
}

struct DCSCheckReport {
    bool nonincreasing = false;
    double worst_increase = 0.0; ///< largest observed mu(r2) - mu(r1), r2 > r1
    double local_mass = 0.0;     ///< integral of mu over B_r
    double radius = 0.0;
};

/// Validates the profile invariants: radial monotonicity on a geometric radius
/// ladder and finiteness of the local integral over B_r (singularity-refining
/// quadrature; throws NonIntegrableSingularityError when it diverges).
inline DCSCheckReport check_dcs_invariants(const DCSSpec& s, int N, double r = 0.0,
                                           int samples = 400) {
    if (r <= 0.0) r = std::isfinite(s.cutoff_r) ? s.cutoff_r : 1.0;
    DCSCheckReport rep;
    rep.radius = r;

    double prev = kInf, worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double ri = r * std::pow(1e-8, 1.0 - double(i) / (samples - 1.0));
        const double m = s.mu(ri);
        if (m > prev) worst = std::max(worst, m - prev);
        prev = m;
    }
    rep.worst_increase = worst;
    rep.nonincreasing = worst <= 1e-12;

    // Log-perturbed near-border singularities shed panel mass very slowly
    // (no ratio lock), so grant generous level headroom before giving up.
    const auto ti = integrate_dyadic_lower(
        [&](double rho) { return s.mu(rho) * std::pow(rho, N - 1); }, r, 1e-10, 200);
    if (!ti.converged)
        throw NonIntegrableSingularityError(
            "profile mass over B_" + std::to_string(r) + " does not converge");
    rep.local_mass = sphere_measure(N) * ti.value;
    return rep;
}

/// N + theta (1 - q_f - eps0): positive iff the profile's local integrability
/// exponent clears the dimension.
inline double integrability_exponent(const Calculus& c, int N, double theta,
                                     double eps0 = 0.05) {
    return N + theta * (1.0 - c.q_f - eps0);
}

/// log_i A(u) / log_i u for i = 1..n — the iterated-log comparison whose limit
/// is 1; finite-u values approach it only at log-rate.
inline std::vector<double> expn_loglog_ratios(int n, double p, double u) {
    const double a = detail::iterated_log_A(n, p, u);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) out.push_back(log_n(i, a) / log_n(i, u));
    return out;
}

// ============================ condition verdicts ============================

enum class ConditionKind { NecessaryViolated, NecessaryPassed, SufficientHolds, SufficientFails };

inline const char* condition_kind_name(ConditionKind k) {
    switch (k) {
        case ConditionKind::NecessaryViolated: return "necessary_violated";
        case ConditionKind::NecessaryPassed: return "necessary_passed";
        case ConditionKind::SufficientHolds: return "sufficient_holds";
        case ConditionKind::SufficientFails: return "sufficient_fails";
    }
    return "?";
}

struct SolvabilityVerdict {
    ConditionKind kind = ConditionKind::NecessaryPassed;
    // witness achieving (or breaking) the tested inequality
    double witness_x = 0.0; ///< radius (pointwise/sufficient) or location (necessary)
    double witness_t = 0.0;
    double witness_value = 0.0;
    double worst_ratio = 0.0; ///< extremal value of the tested ratio
    // parameters the verdict was computed under
    double gamma = 0.0, eps = 0.0, beta = 0.0, delta = 0.0;
    double Cstar = 0.0, Tstar = 0.0, tau_star = 0.0, kappa = 0.0;
    std::string detail;
};

enum class PointwiseSide {
    LowerBound, ///< G(mu(x)) >= gamma |x|^{-theta}: nonexistence side
    UpperBound  ///< G(mu(x)) <= eps |x|^{-theta}: existence side
};

/// Samples G(mu(r)) r^theta on a geometric radius grid in (r_lo, r_hi] and
/// reports which side of the tested constant the profile sits on.
inline SolvabilityVerdict check_pointwise_condition(
    const Calculus& c, const std::function<double(double)>& mu_radial, double theta,
    PointwiseSide side, double constant, double r_hi, double r_lo = 0.0,
    int samples = 256) {
    if (!(constant > 0.0))
        throw ConfigError("pointwise.constant", "requires a positive constant");
    if (!(r_hi > 0.0)) throw ConfigError("pointwise.r", "requires r > 0");
    if (r_lo <= 0.0) r_lo = r_hi * 1e-6;
    if (!(r_lo < r_hi)) throw ConfigError("pointwise.r", "requires r_lo < r_hi");

    SolvabilityVerdict v;
    const bool lower = side == PointwiseSide::LowerBound;
    (lower ? v.gamma : v.eps) = constant;

    double extremal = lower ? kInf : 0.0;
    double where = r_lo;
    for (int i = 0; i < samples; ++i) {
        const double t = samples == 1 ? 1.0 : double(i) / (samples - 1.0);
        const double r = r_lo * std::pow(r_hi / r_lo, t);
        const double m = std::max(mu_radial(r), 0.0);
        const double ratio = c.G(m) * std::pow(r, theta);
        if (lower ? ratio < extremal : ratio > extremal) {
            extremal = ratio;
            where = r;
        }
    }
    v.worst_ratio = extremal;
    v.witness_x = where;
    v.witness_value = extremal;
    const double slack = 1.0 + 1e-12;
    if (lower)
        v.kind = extremal * slack >= constant ? ConditionKind::NecessaryViolated
                                              : ConditionKind::NecessaryPassed;
    else
        v.kind = extremal <= constant * slack ? ConditionKind::SufficientHolds
                                              : ConditionKind::SufficientFails;
    return v;
}

/// Scans F([S(t)mu]) >= Cstar t over a time grid.  F is decreasing, so only
/// the spatial sup of the evolved data matters at each time.
inline SolvabilityVerdict check_necessary(const KernelTable& k, const Calculus& c,
                                          const GridField& u0, double Cstar, double Tstar,
                                          const std::vector<double>& t_grid) {
    if (!(Cstar > 0.0) || Cstar > 1.0)
        throw ConfigError("necessary.Cstar", "requires Cstar in (0, 1]");
    if (!(Tstar > 0.0)) throw ConfigError("necessary.Tstar", "requires Tstar > 0");
    if (t_grid.empty()) throw ConfigError("necessary.t_grid", "requires a nonempty grid");
    double t_max = 0.0;
    for (double t : t_grid) {
        if (!(t > 0.0) || t > Tstar)
            throw ConfigError("necessary.t_grid", "times must lie in (0, Tstar]");
        t_max = std::max(t_max, t);
    }

    SemigroupOperator op(k, u0.dim, u0.half_width, u0.points);
    op.guard_window(t_max);

    SolvabilityVerdict v;
    v.Cstar = Cstar;
    v.Tstar = Tstar;
    v.kind = ConditionKind::NecessaryPassed;
    double worst = kInf;
    for (double t : t_grid) {
        const GridField ut = op.apply(u0, t);
        double sup = ut.background;
        std::size_t arg = 0;
        for (std::size_t i = 0; i < ut.values.size(); ++i)
            if (ut.values[i] > sup) {
                sup = ut.values[i];
                arg = i;
            }
        const double margin = c.F(sup) - Cstar * t;
        if (margin < worst) {
            worst = margin;
            v.witness_t = t;
            v.witness_x = ut.center(static_cast<int>(arg % ut.points));
            v.witness_value = margin;
        }
        if (margin < 0.0) {
            v.kind = ConditionKind::NecessaryViolated;
            break;
        }
    }
    v.worst_ratio = worst;
    return v;
}

/// Violation time of the necessary condition for spatially constant data:
/// S(t)c = c * mass, so F(c * mass) = Cstar t pins it exactly.
inline double necessary_violation_time(const Calculus& c, double const_value, double Cstar,
                                       double mass = 1.0) {
    if (!(Cstar > 0.0)) throw ConfigError("necessary.Cstar", "requires Cstar > 0");
    if (!(const_value > 0.0))
        throw ConfigError("necessary.const", "requires positive constant data");
    return c.F(const_value * mass) / Cstar;
}

/// Bisection for the earliest violation time of F(sup S(t)mu) >= Cstar t on
/// (0, t_hi]; +inf when the condition holds up to t_hi.
inline double find_necessary_violation_time(const KernelTable& k, const Calculus& c,
                                            const GridField& u0, double Cstar,
                                            double t_hi, double rel_tol = 1e-8) {
    if (!(Cstar > 0.0)) throw ConfigError("necessary.Cstar", "requires Cstar > 0");
    if (!(t_hi > 0.0)) throw ConfigError("necessary.t_hi", "requires t_hi > 0");
    SemigroupOperator op(k, u0.dim, u0.half_width, u0.points);
    op.guard_window(t_hi);
    auto margin = [&](double t) { return c.F(op.apply(u0, t).sup()) - Cstar * t; };
    if (margin(t_hi) >= 0.0) return kInf;
    double lo = t_hi * 1e-9;
    for (int i = 0; i < 6 && margin(lo) < 0.0; ++i) lo *= 1e-2;
    if (margin(lo) < 0.0) return lo; // violated essentially immediately
    double hi = t_hi;
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ========================== sufficient-condition check ==========================

struct SufficientCheckConfig {
    double beta = 0.0;  ///< must lie in (q_f - 1, min{q_f, N/theta})
    double delta = 0.0; ///< must satisfy q_f < 1 + beta - delta
    double eps = 1.0;   ///< ball-average budget
    double T = 1.0;     ///< horizon; sigma ranges over (0, T^{1/theta})
    double tau_star = 0.0;        ///< tail start for the growth-ratio check; 0 = auto
    double kappa = 2.0;           ///< comparison constant (> 1), reported only
    int sigma_points = 48;        ///< geometric sigma grid size
    double sigma_min_factor = 1e-3; ///< sigma_min = factor * T^{1/theta}
    int tail_samples = 200;       ///< growth-ratio samples over 8 decades
};

namespace detail {

/// Validates the beta window and the sampled growth-ratio condition
/// beta <= f'(u) F(u) <= 1 + beta - delta on a tail; returns the tail start.
inline double sufficient_precheck(const Nonlinearity& nl, const Calculus& c, int N,
                                  double theta, const SufficientCheckConfig& cfg,
                                  SolvabilityVerdict& v) {
    const double win_lo = c.q_f - 1.0;
    const double win_hi = std::min(c.q_f, double(N) / theta);
    if (!(win_lo < win_hi))
        throw BetaWindowEmptyError("beta window (" + std::to_string(win_lo) + ", " +
                                   std::to_string(win_hi) +
                                   ") is empty: growth is not supercritical for this "
                                   "dimension and order");
    if (!(cfg.beta > win_lo) || !(cfg.beta < win_hi))
        throw ConfigError("sufficient.beta",
                          "beta must lie in (" + std::to_string(win_lo) + ", " +
                              std::to_string(win_hi) + ")");
    if (!(cfg.delta > 0.0) || !(c.q_f < 1.0 + cfg.beta - cfg.delta))
        throw ConfigError("sufficient.delta",
                          "requires delta > 0 with q_f < 1 + beta - delta");
    if (!(cfg.kappa > 1.0)) throw ConfigError("sufficient.kappa", "requires kappa > 1");
    if (!(cfg.eps > 0.0)) throw ConfigError("sufficient.eps", "requires eps > 0");
    if (!(cfg.T > 0.0)) throw ConfigError("sufficient.T", "requires T > 0");

    v.beta = cfg.beta;
    v.delta = cfg.delta;
    v.eps = cfg.eps;
    v.kappa = cfg.kappa;

    // sampled growth-ratio corridor on a geometric tail
    const double lo = cfg.tau_star > 0.0 ? cfg.tau_star : 1.0;
    const double hi = lo * 1e8;
    const int S = std::max(cfg.tail_samples, 8);
    std::vector<double> u(S), ratio(S);
    for (int i = 0; i < S; ++i) {
        u[i] = lo * std::pow(hi / lo, double(i) / (S - 1.0));
        ratio[i] = nl.f_prime(u[i]) * c.F(u[i]);
    }
    int start = -1;
    for (int i = S - 1; i >= 0; --i) {
        const bool ok = ratio[i] >= cfg.beta && ratio[i] <= 1.0 + cfg.beta - cfg.delta;
        if (!ok) break;
        start = i;
    }
    if (cfg.tau_star > 0.0 && start != 0) {
        // a caller-specified tail start must make the whole tail admissible
        int bad = start < 0 ? S - 1 : start - 1;
        v.kind = ConditionKind::SufficientFails;
        v.witness_x = u[bad];
        v.witness_value = ratio[bad];
        v.detail = "growth ratio leaves [beta, 1 + beta - delta] at u = " +
                   std::to_string(u[bad]);
        return -1.0;
    }
    if (start < 0) {
        v.kind = ConditionKind::SufficientFails;
        v.witness_x = u[S - 1];
        v.witness_value = ratio[S - 1];
        v.detail = "growth ratio never enters [beta, 1 + beta - delta] on the sampled tail";
        return -1.0;
    }
    return u[start];
}

} // namespace detail

/// Average of a radial function over the ball B(0, sigma) in R^N, computed by
/// singularity-refining quadrature toward the origin.
inline double radial_ball_average(const std::function<double(double)>& g, int N,
                                  double sigma, double rel_tol = 1e-9) {
    if (!(sigma > 0.0)) throw ConfigError("ball_average.sigma", "requires sigma > 0");
    sphere_measure(N); // validates the dimension
    const auto ti = integrate_dyadic_lower(
        [&](double rho) { return g(rho) * std::pow(rho, N - 1); }, sigma, rel_tol, 200);
    if (!ti.converged)
        throw NonIntegrableSingularityError(
            "ball average does not converge at sigma = " + std::to_string(sigma));
    return double(N) * ti.value / std::pow(sigma, N);
}

/// Radial-profile path: for radially nonincreasing data the sup over centers
/// is attained at the singularity, so the centered ball average suffices and
/// is computed by singularity-refining quadrature.
inline SolvabilityVerdict check_sufficient(const Nonlinearity& nl, const Calculus& c,
                                           const std::function<double(double)>& mu_radial,
                                           int N, double theta,
                                           const SufficientCheckConfig& cfg) {
    SolvabilityVerdict v;
    const double tau = detail::sufficient_precheck(nl, c, N, theta, cfg, v);
    if (tau < 0.0) return v;
    v.tau_star = tau;

    const double sigma_hi = std::pow(cfg.T, 1.0 / theta);
    const double sigma_lo = sigma_hi * cfg.sigma_min_factor;
    const int S = std::max(cfg.sigma_points, 2);

    double worst = 0.0, worst_sigma = sigma_lo, worst_avg = 0.0;
    for (int i = 0; i < S; ++i) {
        const double sigma = sigma_lo * std::pow(sigma_hi / sigma_lo, double(i) / (S - 1.0));
        const double avg = radial_ball_average(
            [&](double rho) {
                return std::pow(c.G(std::max(mu_radial(rho), 0.0)), cfg.beta);
            },
            N, sigma);
        const double scaled = avg * std::pow(sigma, cfg.beta * theta);
        if (scaled > worst) {
            worst = scaled;
            worst_sigma = sigma;
            worst_avg = avg;
        }
    }
    v.worst_ratio = worst;
    v.witness_x = worst_sigma;
    v.witness_value = worst_avg;
    v.kind = worst <= cfg.eps * (1.0 + 1e-12) ? ConditionKind::SufficientHolds
                                              : ConditionKind::SufficientFails;
    return v;
}

/// Grid path (1-D): sliding-window ball averages of G(u0)^beta over all
/// centers whose window fits inside the box.
inline SolvabilityVerdict check_sufficient(const Nonlinearity& nl, const Calculus& c,
                                           const GridField& u0, double theta,
                                           const SufficientCheckConfig& cfg) {
    if (u0.dim != 1)
        throw ConfigError("sufficient.grid", "grid ball averages support dim = 1 only");
    SolvabilityVerdict v;
    const double tau = detail::sufficient_precheck(nl, c, u0.dim, theta, cfg, v);
    if (tau < 0.0) return v;
    v.tau_star = tau;

    const int M = u0.points;
    const double h = u0.h();
    std::vector<double> prefix(static_cast<std::size_t>(M) + 1, 0.0);
    for (int i = 0; i < M; ++i)
        prefix[i + 1] = prefix[i] + std::pow(c.G(std::max(u0.values[i], 0.0)), cfg.beta);

    const double sigma_hi = std::pow(cfg.T, 1.0 / theta);
    const double sigma_lo = sigma_hi * cfg.sigma_min_factor;
    const int S = std::max(cfg.sigma_points, 2);

    double worst = 0.0, worst_sigma = sigma_lo, worst_x = 0.0, worst_avg = 0.0;
    for (int s = 0; s < S; ++s) {
        const double sigma = sigma_lo * std::pow(sigma_hi / sigma_lo, double(s) / (S - 1.0));
        const int span = std::max(1, static_cast<int>(std::floor(sigma / h)));
        if (2 * span + 1 > M) continue; // window no longer fits
        double best = -1.0;
        int best_i = span;
        for (int i = span; i < M - span; ++i) {
            const double sum = prefix[i + span + 1] - prefix[i - span];
            if (sum > best) {
                best = sum;
                best_i = i;
            }
        }
        const double width = (2 * span + 1) * h;
        const double avg = best * h / width;
        const double scaled = avg * std::pow(sigma, cfg.beta * theta);
        if (scaled > worst) {
            worst = scaled;
            worst_sigma = sigma;
            worst_x = u0.center(best_i);
            worst_avg = avg;
        }
    }
    v.worst_ratio = worst;
    v.witness_x = worst_x;
    v.witness_t = worst_sigma; // the sigma achieving the worst scaled average
    v.witness_value = worst_avg;
    v.kind = worst <= cfg.eps * (1.0 + 1e-12) ? ConditionKind::SufficientHolds
                                              : ConditionKind::SufficientFails;
    return v;
}

// ============================ asymptotic pairing ============================

struct AsymptoticPairReport {
    double comp_lo = kInf, comp_hi = 0.0; ///< range of phi(psi(u)) / u
    double gg_lo = kInf, gg_hi = 0.0;     ///< range of phi(u) / G(u)
    bool comp_bracketed = false;
    bool gg_bracketed = false;
    bool pass = false;
};

/// Verifies phi∘psi ≍ id (and optionally phi ≍ G) on a geometric grid: every
/// sampled ratio must land inside [bracket_lo, bracket_hi].
inline AsymptoticPairReport check_asymptotic_pair(
    const std::function<double(double)>& phi, const std::function<double(double)>& psi,
    double u_lo, double u_hi, int points = 64, const Calculus* g_ref = nullptr,
    double bracket_lo = 1e-3, double bracket_hi = 1e3) {
    if (!(u_lo > 0.0) || !(u_hi > u_lo))
        throw ConfigError("asymptotic.grid", "requires 0 < u_lo < u_hi");
    AsymptoticPairReport rep;
    rep.comp_bracketed = true;
    rep.gg_bracketed = true;
    for (int i = 0; i < points; ++i) {
        const double u = u_lo * std::pow(u_hi / u_lo, double(i) / (points - 1.0));
        const double comp = phi(psi(u)) / u;
        rep.comp_lo = std::min(rep.comp_lo, comp);
        rep.comp_hi = std::max(rep.comp_hi, comp);
        if (!(comp >= bracket_lo && comp <= bracket_hi)) rep.comp_bracketed = false;
        if (g_ref) {
            const double gg = phi(u) / g_ref->G(u);
            rep.gg_lo = std::min(rep.gg_lo, gg);
            rep.gg_hi = std::max(rep.gg_hi, gg);
            if (!(gg >= bracket_lo && gg <= bracket_hi)) rep.gg_bracketed = false;
        }
    }
    rep.pass = rep.comp_bracketed && (!g_ref || rep.gg_bracketed);
    return rep;
}

// ============================ dilation bracketing ============================

struct LambdaSweepRow {
    double lambda = 0.0;
    SolveVerdict verdict = SolveVerdict::Inconclusive;
    double T_reached = 0.0;
    double sup_final = 0.0;
    double residual_final = 0.0;
    bool refinement_stable = false;
};

struct LambdaBracket {
    double lo = 0.0;  ///< largest lambda with a converged run
    double hi = kInf; ///< smallest lambda with blow-up evidence
    std::vector<LambdaSweepRow> rows; ///< sorted by lambda
    bool bisection_hit_inconclusive = false;
};

struct LambdaSweepConfig {
    std::vector<double> lambdas; ///< initial ladder (positive; sorted internally)
    int bisection_steps = 6;
    double T = 0.5;
    double dt = 1.0 / 128.0;
    double tol = 1e-8;
    double cap = 1e8;
    double half_width = 4.0;
    int points = 4096;
    int dim = 1;
    double singular_exponent = -1.0; ///< >= 0: declare the origin singularity
    int max_iter = 400;
    bool require_supercritical = true;
};

namespace detail {

inline GridField discretize_profile(const DCSSpec& spec, const LambdaSweepConfig& cfg,
                                    int points) {
    SingularityMark mark;
    if (cfg.singular_exponent >= 0.0) {
        mark.present = true;
        mark.exponent = cfg.singular_exponent;
    }
    if (cfg.dim == 1)
        return discretize(cfg.half_width, points,
                          [&](double x) { return spec.mu(std::abs(x)); }, 0.0, mark);
    return discretize(cfg.dim, cfg.half_width, points,
                      [&](std::array<double, 3> x) {
                          double r2 = 0.0;
                          for (int d = 0; d < cfg.dim; ++d) r2 += x[d] * x[d];
                          return spec.mu(std::sqrt(r2));
                      },
                      0.0, mark);
}

inline int verdict_rank(SolveVerdict v) {
    switch (v) {
        case SolveVerdict::Converged: return 0;
        case SolveVerdict::Inconclusive: return 1;
        case SolveVerdict::BlowUpEvidence: return 2;
    }
    return 1;
}

} // namespace detail

/// Sweeps the dilation parameter, asserts verdict monotonicity, and brackets
/// the threshold between the largest converged and smallest blowing-up
/// lambda, then tightens geometrically until the budget is spent or a
/// mid-point comes back Inconclusive (the grid cannot decide closer).
inline LambdaBracket bracket_lambda0(const KernelTable& k, const Nonlinearity& nl,
                                     const std::function<DCSSpec(double)>& profile,
                                     const LambdaSweepConfig& cfg) {
    if (cfg.lambdas.size() < 2)
        throw ConfigError("sweep.lambdas", "need at least two lambda values");
    for (double l : cfg.lambdas)
        if (!(l > 0.0)) throw ConfigError("sweep.lambdas", "lambdas must be positive");

    if (cfg.require_supercritical) {
        const Calculus c = build_calculus(nl);
        if (classify(c, cfg.dim, profile(cfg.lambdas.front()).theta) !=
            Criticality::Supercritical)
            throw ConfigError("sweep.nonlinearity",
                              "dilation bracketing requires supercritical growth");
    }

    LambdaBracket out;
    auto run = [&](double lambda) {
        const DCSSpec spec = profile(lambda);
        const GridField u0 = detail::discretize_profile(spec, cfg, cfg.points);
        MildSolveOptions opt;
        opt.max_iter = cfg.max_iter;
        opt.store_trajectory = false;
        opt.rediscretize = [&, lambda](int factor) {
            return detail::discretize_profile(profile(lambda), cfg, cfg.points * factor);
        };
        const auto rep = mild_solve(k, nl, u0, cfg.T, cfg.dt, cfg.tol, cfg.cap, opt);
        LambdaSweepRow row;
        row.lambda = lambda;
        row.verdict = rep.verdict;
        row.T_reached = rep.T_reached;
        const int kf = rep.first_exceed_step;
        row.sup_final =
            kf >= 0 ? rep.sup_history[static_cast<std::size_t>(kf)] : rep.sup_history.back();
        row.residual_final =
            rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
        row.refinement_stable = rep.refinement_stable;
        return row;
    };

    std::vector<double> ladder = cfg.lambdas;
    std::sort(ladder.begin(), ladder.end());
    for (double l : ladder) out.rows.push_back(run(l));

    auto assert_monotone = [&]() {
        for (std::size_t i = 1; i < out.rows.size(); ++i)
            if (detail::verdict_rank(out.rows[i].verdict) <
                detail::verdict_rank(out.rows[i - 1].verdict))
                throw NonMonotoneSweepError(
                    "verdict weakened from lambda = " +
                    std::to_string(out.rows[i - 1].lambda) + " to lambda = " +
                    std::to_string(out.rows[i].lambda));
    };
    assert_monotone();

    auto refresh_bracket = [&]() {
        out.lo = 0.0;
        out.hi = kInf;
        for (const auto& row : out.rows) {
            if (row.verdict == SolveVerdict::Converged) out.lo = std::max(out.lo, row.lambda);
            if (row.verdict == SolveVerdict::BlowUpEvidence)
                out.hi = std::min(out.hi, row.lambda);
        }
    };
    refresh_bracket();
    if (!(out.lo > 0.0) || !std::isfinite(out.hi))
        throw BracketFailureError("lambda sweep did not straddle the threshold: lo = " +
                                  std::to_string(out.lo) + ", hi = " +
                                  std::to_string(out.hi));

    for (int step = 0; step < cfg.bisection_steps; ++step) {
        const double mid = std::sqrt(out.lo * out.hi);
        LambdaSweepRow row = run(mid);
        const auto pos = std::upper_bound(
            out.rows.begin(), out.rows.end(), row.lambda,
            [](double l, const LambdaSweepRow& r) { return l < r.lambda; });
        out.rows.insert(pos, row);
        assert_monotone();
        if (row.verdict == SolveVerdict::Converged)
            out.lo = mid;
        else if (row.verdict == SolveVerdict::BlowUpEvidence)
            out.hi = mid;
        else {
            out.bisection_hit_inconclusive = true;
            break; // the grid cannot separate the sides any further
        }
    }
    return out;
}

} // namespace fracheat
