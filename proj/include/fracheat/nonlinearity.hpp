#pragma once

// Source terms f for the semilinear problem, with the structural hypotheses
// they are expected to satisfy:
//
//   (M)  f is continuous, nondecreasing, and positive for u > 0;
//   (S)  f is C^1 on [tau0, inf) for some tau0 >= 0 and 1/f has a convergent
//        upper tail integral (superlinear growth);
//   (C)  f' is nondecreasing beyond some tau1 (eventual convexity).
//
// Built-in families:
//
//   Power(p)          u^p                          p > 1
//   PowerSum(p, q)    u^p + u^q                    p > q >= 1
//   PowerLog(p, q, L) u^p (log u)^q   for u >= L   p > 1, L > 1
//                     u^p (log L)^q   for u <  L   (continuous continuation)
//   ExpN(n, p)        exp_n(u^p)                   n >= 1, p > 0
//   Custom            expression strings for f and f'
//
// exp_n / log_n denote the n-fold composition of exp / log.  All evaluators
// saturate to +inf on overflow rather than trapping.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

#include "fracheat/errors.hpp"
#include "fracheat/expr.hpp"
#include "fracheat/quadrature.hpp"

namespace fracheat {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// n-fold composition exp(exp(...exp(u)...)); exp_0 = identity.
inline double exp_n(int n, double u) {
    double v = u;
    for (int k = 0; k < n; ++k) v = std::exp(v);
    return v;
}

/// n-fold composition log(log(...log(u)...)); log_0 = identity.
/// Returns NaN when an intermediate value leaves the log domain.
inline double log_n(int n, double u) {
    double v = u;
    for (int k = 0; k < n; ++k) v = std::log(v);
    return v;
}

enum class Family { Power, PowerSum, PowerLog, ExpN, Custom };

inline const char* family_name(Family fam) {
    switch (fam) {
        case Family::Power: return "power";
        case Family::PowerSum: return "powersum";
        case Family::PowerLog: return "powerlog";
        case Family::ExpN: return "expn";
        case Family::Custom: return "custom";
    }
    return "?";
}

/// A source term f with its derivative, hypothesis thresholds, and whatever
/// closed forms the family admits.  Value type; cheap to copy.
class Nonlinearity {
  public:
    Family family = Family::Custom;
    double p = 0.0; ///< Power / PowerSum / PowerLog / ExpN exponent
    double q = 0.0; ///< PowerSum second exponent, PowerLog log exponent
    double L = 0.0; ///< PowerLog switch point (> 1)
    int n = 0;      ///< ExpN composition depth

    double tau0 = 0.0; ///< f is C^1 on [tau0, inf)
    double tau1 = 0.0; ///< f' nondecreasing on [tau1, inf)

    // ---- constructors ------------------------------------------------------

    static Nonlinearity power(double p) {
        require(p > 1.0, "power.p", "requires p > 1");
        Nonlinearity nl;
        nl.family = Family::Power;
        nl.p = p;
        return nl;
    }

    static Nonlinearity power_sum(double p, double q) {
        require(q >= 1.0, "powersum.q", "requires q >= 1");
        require(p > q, "powersum.p", "requires p > q");
        Nonlinearity nl;
        nl.family = Family::PowerSum;
        nl.p = p;
        nl.q = q;
        return nl;
    }

    static Nonlinearity power_log(double p, double q, double L) {
        require(p > 1.0, "powerlog.p", "requires p > 1");
        require(L > 1.0, "powerlog.L", "requires L > 1");
        // Below the switch point the continuation is u^p (log L)^q, which is
        // C^1 everywhere except exactly at L; both thresholds sit there.
        require(p * std::log(L) + q > 0.0, "powerlog.L",
                "switch point too small: u^p (log u)^q is not increasing at L");
        Nonlinearity nl;
        nl.family = Family::PowerLog;
        nl.p = p;
        nl.q = q;
        nl.L = L;
        nl.tau0 = L;
        nl.tau1 = L;
        return nl;
    }

    static Nonlinearity exp_family(int n, double p) {
        require(n >= 1, "expn.n", "requires n >= 1");
        require(p > 0.0, "expn.p", "requires p > 0");
        Nonlinearity nl;
        nl.family = Family::ExpN;
        nl.n = n;
        nl.p = p;
        // exp(u^p) has an inflection at u^p = (1-p)/p when p < 1; deeper
        // compositions only add positive terms to f''.
        nl.tau1 = p >= 1.0 ? 0.0 : std::pow((1.0 - p) / p, 1.0 / p);
        return nl;
    }

    static Nonlinearity custom(const std::string& f_text, const std::string& fprime_text,
                               double tau0 = 0.0, double tau1 = 0.0) {
        Nonlinearity nl;
        nl.family = Family::Custom;
        nl.f_expr_ = Expression::parse(f_text);
        nl.fp_expr_ = Expression::parse(fprime_text);
        nl.tau0 = tau0;
        nl.tau1 = tau1;
        return nl;
    }

    // ---- evaluation --------------------------------------------------------

    [[nodiscard]] double f(double u) const {
        switch (family) {
            case Family::Power: return std::pow(u, p);
            case Family::PowerSum: return std::pow(u, p) + std::pow(u, q);
            case Family::PowerLog: {
                const double lg = u >= L ? std::log(u) : std::log(L);
                return std::pow(u, p) * std::pow(lg, q);
            }
            case Family::ExpN: return exp_n(n, std::pow(u, p));
            case Family::Custom: return f_expr_(u);
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    [[nodiscard]] double f_prime(double u) const {
        switch (family) {
            case Family::Power: return p * std::pow(u, p - 1.0);
            case Family::PowerSum:
                return p * std::pow(u, p - 1.0) + q * std::pow(u, q - 1.0);
            case Family::PowerLog: {
                if (u >= L) {
                    const double lg = std::log(u);
                    return std::pow(u, p - 1.0) * std::pow(lg, q - 1.0) * (p * lg + q);
                }
                return p * std::pow(u, p - 1.0) * std::pow(std::log(L), q);
            }
            case Family::ExpN: {
                // d/du exp_n(u^p) = p u^{p-1} prod_{k=1}^{n} exp_k(u^p)
                const double w = std::pow(u, p);
                double prod = p * std::pow(u, p - 1.0);
                double e = w;
                for (int k = 1; k <= n; ++k) {
                    e = std::exp(e);          // exp_k(u^p)
                    prod *= e;
                    if (std::isinf(prod)) return kInf;
                }
                return prod;
            }
            case Family::Custom: return fp_expr_(u);
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    // ---- closed forms (where the family admits them) -----------------------

    /// Exact q_f = lim f'(u) F(u), when known for the family.
    [[nodiscard]] std::optional<double> closed_qf() const {
        switch (family) {
            case Family::Power:
            case Family::PowerSum:
            case Family::PowerLog: return p / (p - 1.0);
            case Family::ExpN: return 1.0;
            case Family::Custom: return std::nullopt;
        }
        return std::nullopt;
    }

    [[nodiscard]] bool has_closed_calculus() const {
        return family == Family::Power || (family == Family::ExpN && n == 1 && p == 1.0);
    }

    /// F(u) = int_u^inf ds/f(s) in closed form (Power and plain exp only).
    [[nodiscard]] double closed_F(double u) const {
        if (family == Family::Power) return std::pow(u, 1.0 - p) / (p - 1.0);
        return std::exp(-u); // ExpN(1,1)
    }

    [[nodiscard]] double closed_F_inv(double sigma) const {
        if (family == Family::Power) return std::pow((p - 1.0) * sigma, -1.0 / (p - 1.0));
        return -std::log(sigma); // ExpN(1,1)
    }

    /// F(0+); +inf when the integral diverges at zero.
    [[nodiscard]] double closed_F0() const {
        if (family == Family::Power) return kInf;
        return 1.0; // ExpN(1,1): int_0^inf e^{-s} ds
    }

    [[nodiscard]] const std::string& f_text() const { return f_expr_.text(); }
    [[nodiscard]] const std::string& fprime_text() const { return fp_expr_.text(); }

  private:
    static void require(bool ok, const char* field, const char* msg) {
        if (!ok) throw ConfigError(field, msg);
    }

    Expression f_expr_;  // Custom only
    Expression fp_expr_; // Custom only
};

// ---- hypothesis checks (sampled, not symbolic) -----------------------------

struct HypothesisCheckConfig {
    double u_min = 1e-6;   ///< sampling starts here (or above the thresholds)
    double u_max = 1e10;   ///< capped further by overflow detection
    int samples = 400;     ///< geometric sample count
    double slack = 1e-9;   ///< relative slack for monotonicity comparisons
};

struct HypothesisReport {
    bool monotone_positive = false; ///< (M) on the sample grid
    bool tail_integrable = false;   ///< (S): Cauchy upper tail of 1/f
    bool derivative_monotone = false; ///< (C): f' nondecreasing beyond tau1
    double u_overflow = kInf;       ///< largest representable argument found
    std::string first_violation;    ///< empty when all checks pass

    [[nodiscard]] bool all() const {
        return monotone_positive && tail_integrable && derivative_monotone;
    }
};

/// Largest u (searched up to `hi`) with f(u) and f'(u) below ~1e290.  Families
/// with super-exponential growth overflow doubles early; samplers must stay
/// inside this range.
inline double overflow_horizon(const Nonlinearity& nl, double hi = 1e12) {
    const double big = 1e290;
    auto fits = [&](double u) {
        const double fu = nl.f(u);
        const double fpu = nl.f_prime(u);
        return std::isfinite(fu) && std::isfinite(fpu) && fu < big && fpu < big;
    };
    if (fits(hi)) return hi;
    double lo = 1e-8;
    if (!fits(lo)) return lo;
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi); // geometric midpoint
        (fits(mid) ? lo : hi) = mid;
        if (hi / lo < 1.0 + 1e-12) break;
    }
    return lo;
}

/// Samples (M), (S), and eventual convexity on a geometric grid.  Returns a
/// report; throwing on failure is left to the caller (build_calculus does).
inline HypothesisReport check_hypotheses(const Nonlinearity& nl,
                                         const HypothesisCheckConfig& cfg = {}) {
    HypothesisReport rep;
    rep.u_overflow = overflow_horizon(nl, cfg.u_max);

    const double lo = cfg.u_min;
    const double hi = std::max(lo * 1e3, 0.95 * rep.u_overflow);
    const int m = cfg.samples;

    // (M): positivity and monotonicity of f.
    rep.monotone_positive = true;
    double prev = -kInf;
    for (int i = 0; i <= m; ++i) {
        const double u = lo * std::pow(hi / lo, double(i) / m);
        const double fu = nl.f(u);
        if (!(fu > 0.0) || std::isnan(fu)) {
            rep.monotone_positive = false;
            rep.first_violation = "f(u) <= 0 or NaN at u = " + std::to_string(u);
            break;
        }
        if (fu < prev * (1.0 - cfg.slack)) {
            rep.monotone_positive = false;
            rep.first_violation = "f decreasing near u = " + std::to_string(u);
            break;
        }
        prev = std::max(prev, fu);
    }

    // (S): upper tail of 1/f must be Cauchy.
    auto inv_f = [&](double s) {
        const double fs = nl.f(s);
        return fs > 0.0 ? 1.0 / fs : kInf;
    };
    const double tail_from = std::max({1.0, nl.tau0, nl.tau1});
    const TailIntegral tail = integrate_upper_tail(inv_f, tail_from, 1e-9);
    rep.tail_integrable = tail.converged;
    if (!tail.converged && rep.first_violation.empty())
        rep.first_violation = "tail integral of 1/f fails to converge";

    // (C): f' nondecreasing beyond tau1.
    rep.derivative_monotone = true;
    const double clo = std::max(nl.tau1, lo);
    prev = -kInf;
    for (int i = 0; i <= m; ++i) {
        const double u = clo * std::pow(hi / clo, double(i) / m);
        if (u < clo) continue;
        const double d = nl.f_prime(u);
        if (std::isnan(d) || d < prev * (1.0 - cfg.slack)) {
            rep.derivative_monotone = false;
            if (rep.first_violation.empty())
                rep.first_violation = "f' decreasing near u = " + std::to_string(u);
            break;
        }
        prev = std::max(prev, d);
    }

    return rep;
}

} // namespace fracheat
