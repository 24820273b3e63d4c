#pragma once

// Derived calculus for a source term f:
//
//   F(u)   = int_u^inf ds / f(s)        (finite for u > 0 by superlinearity)
//   F0     = lim_{u->0+} F(u)           (may be +inf)
//   G(u)   = 1 / F(u),  G0 = 1 / F0     (G0 = 0 when F0 = +inf)
//   psi(v) = 0 on [0, G0], G^{-1}(v) for v > G0   (zero extension of G^{-1})
//   q_f    = lim_{u->inf} f'(u) F(u)    (>= 1 when it exists)
//   p_f    = q_f / (q_f - 1)            (+inf when q_f = 1)
//
// Closed forms are used for the families that admit them; everything else goes
// through tail-extrapolated quadrature and expanding-bracket bisection.  The
// growth exponent q_f is either taken from the family or estimated from
// samples of f'(u) F(u) on a geometric grid with sequence acceleration.

#include <cmath>
#include <string>
#include <vector>

#include "fracheat/errors.hpp"
#include "fracheat/nonlinearity.hpp"
#include "fracheat/quadrature.hpp"

namespace fracheat {

struct CalculusConfig {
    double quad_rel_tol = 1e-11; ///< relative tolerance for F quadrature
    bool use_closed_forms = true; ///< false forces the quadrature path everywhere

    // q_f estimation grid: geometric, clipped to the overflow horizon.
    double qf_grid_lo = 1e2;
    double qf_grid_hi = 1e12;
    int qf_points = 60;
    int qf_tail = 10; ///< points entering the extrapolation

    HypothesisCheckConfig hypotheses;
};

/// Result of the numerical q_f limit estimate.
struct QfEstimate {
    double q_hat = 0.0;
    bool converged = false;
    double spread = 0.0;          ///< fluctuation of the accepted tail
    std::string method;           ///< "aitken" or "log-richardson"
    std::vector<double> u;        ///< sample grid
    std::vector<double> ell;      ///< raw samples of f'(u) F(u)
    std::vector<double> accelerated; ///< accepted extrapolated sequence
};

enum class Criticality { Subcritical, Critical, Supercritical };

inline const char* criticality_name(Criticality c) {
    switch (c) {
        case Criticality::Subcritical: return "subcritical";
        case Criticality::Critical: return "critical";
        case Criticality::Supercritical: return "supercritical";
    }
    return "?";
}

class Calculus {
  public:
    Nonlinearity nl;
    CalculusConfig cfg;

    double F0 = kInf;
    double G0 = 0.0;
    double q_f = 0.0;
    double p_f = 0.0;
    bool qf_from_closed_form = false;
    QfEstimate qf_estimate; ///< populated when q_f was estimated
    HypothesisReport hypotheses;

    // ---- primary evaluators -------------------------------------------------

    /// F(u) = int_u^inf ds/f(s).  Throws DomainError for u < 0 and
    /// QuadratureFailureError when the tail refuses to converge.
    [[nodiscard]] double F(double u) const {
        if (u < 0.0) throw DomainError("F: argument must be >= 0");
        if (u == 0.0) return F0;
        if (closed_ok()) return nl.closed_F(u);
        auto inv_f = [this](double s) {
            const double fs = nl.f(s);
            return fs > 0.0 ? 1.0 / fs : kInf;
        };
        const TailIntegral t = integrate_upper_tail(inv_f, u, cfg.quad_rel_tol);
        if (!t.converged)
            throw QuadratureFailureError("F: tail integral did not converge at u = " +
                                         std::to_string(u));
        return t.value;
    }

    /// G(u) = 1/F(u); G(0) = G0 by continuity.
    [[nodiscard]] double G(double u) const {
        if (u == 0.0) return G0;
        const double Fu = F(u);
        return Fu == kInf ? 0.0 : 1.0 / Fu;
    }

    /// Inverse of F on (0, F0).  Expanding-bracket bisection on the quadrature
    /// path; exact expression when the family admits one.
    [[nodiscard]] double F_inv(double sigma) const {
        if (!(sigma > 0.0) || sigma >= F0)
            throw DomainError("F_inv: sigma must lie in (0, F0)");
        if (closed_ok()) return nl.closed_F_inv(sigma);
        double lo = 1.0, hi = 1.0;
        double Flo = F(lo);
        if (Flo > sigma) {
            // root is above 1: expand upward
            for (int i = 0;; ++i) {
                hi = lo * 4.0;
                const double Fhi = F(hi);
                if (Fhi <= sigma) break;
                lo = hi;
                if (i > 200 || hi > 1e290)
                    throw BracketFailureError("F_inv: no upper bracket below overflow");
            }
        } else {
            // root is at or below 1: shrink downward
            for (int i = 0;; ++i) {
                lo = hi * 0.25;
                Flo = F(lo);
                if (Flo >= sigma) break;
                hi = lo;
                if (i > 200 || lo < 1e-290)
                    throw BracketFailureError("F_inv: no lower bracket above underflow");
            }
        }
        return bisect([&](double x) { return F(x) - sigma; }, lo, hi);
    }

    /// psi(v): zero on [0, G0], otherwise G^{-1}(v) = F_inv(1/v).
    [[nodiscard]] double psi(double v) const {
        if (v < 0.0) throw DomainError("psi: argument must be >= 0");
        if (v <= G0 || v == 0.0) return 0.0;
        if (closed_ok_power()) {
            // G^{-1}(v) = (v/(p-1))^{1/(p-1)}
            return std::pow(v / (nl.p - 1.0), 1.0 / (nl.p - 1.0));
        }
        if (closed_ok_exp()) return std::log(v); // G = e^u on [G0, inf), G0 = 1
        return F_inv(1.0 / v);
    }

    [[nodiscard]] bool closed_ok() const {
        return cfg.use_closed_forms && nl.has_closed_calculus();
    }

  private:
    [[nodiscard]] bool closed_ok_power() const {
        return closed_ok() && nl.family == Family::Power;
    }
    [[nodiscard]] bool closed_ok_exp() const {
        return closed_ok() && nl.family == Family::ExpN;
    }
};

namespace detail {

/// One Aitken delta-squared sweep; values whose differences are already at
/// rounding level pass through unchanged.
inline std::vector<double> aitken_sweep(const std::vector<double>& s) {
    if (s.size() < 3) return s;
    std::vector<double> out;
    out.reserve(s.size() - 2);
    for (std::size_t i = 0; i + 2 < s.size(); ++i) {
        const double d1 = s[i + 1] - s[i];
        const double d2 = s[i + 2] - s[i + 1];
        const double denom = d2 - d1;
        if (std::abs(denom) <= 1e-13 * (std::abs(s[i + 2]) + 1e-300)) {
            out.push_back(s[i + 2]);
        } else {
            out.push_back(s[i + 2] - d2 * d2 / denom);
        }
    }
    return out;
}

/// Linear Richardson elimination of a c/log(u) error term.
inline std::vector<double> log_richardson_sweep(const std::vector<double>& s,
                                                const std::vector<double>& u) {
    if (s.size() < 2) return s;
    std::vector<double> out;
    out.reserve(s.size() - 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double h0 = 1.0 / std::log(u[i]);
        const double h1 = 1.0 / std::log(u[i + 1]);
        out.push_back((s[i + 1] * h0 - s[i] * h1) / (h0 - h1));
    }
    return out;
}

inline double tail_spread(const std::vector<double>& s, int k = 3) {
    if (s.empty()) return kInf;
    double lo = s.back(), hi = s.back();
    const int from = std::max<int>(0, static_cast<int>(s.size()) - k);
    for (std::size_t i = from; i < s.size(); ++i) {
        lo = std::min(lo, s[i]);
        hi = std::max(hi, s[i]);
    }
    return hi - lo;
}

} // namespace detail

/// Estimates q_f = lim f'(u) F(u) by sampling on a geometric grid (clipped to
/// the overflow horizon) and accelerating the tail.  Two accelerators run --
/// iterated Aitken (exact for error terms geometric in the grid index, which a
/// power-law error in u becomes) and a 1/log(u) Richardson pass (right model
/// for log-corrected families); the flatter accelerated tail wins.
inline QfEstimate estimate_qf(const Calculus& calc) {
    const Nonlinearity& nl = calc.nl;
    const CalculusConfig& cfg = calc.cfg;
    QfEstimate est;

    const double horizon = overflow_horizon(nl, cfg.qf_grid_hi);
    const double floor_u = 1.5 * std::max({nl.tau0, nl.tau1, 1.0});
    const double hi = std::min(cfg.qf_grid_hi, 0.95 * horizon);
    const double lo = std::max(floor_u, std::min(cfg.qf_grid_lo, hi / 32.0));
    if (!(hi > 4.0 * lo))
        throw NoLimitError("estimate_qf: usable grid collapsed (overflow horizon " +
                           std::to_string(horizon) + ")");

    const int m = std::max(cfg.qf_points, cfg.qf_tail + 2);
    est.u.resize(m);
    est.ell.resize(m);
    for (int i = 0; i < m; ++i) {
        const double u = lo * std::pow(hi / lo, double(i) / (m - 1));
        est.u[i] = u;
        est.ell[i] = nl.f_prime(u) * calc.F(u);
    }

    const int tail = std::min<int>(cfg.qf_tail, m);
    std::vector<double> tail_u(est.u.end() - tail, est.u.end());
    std::vector<double> tail_ell(est.ell.end() - tail, est.ell.end());

    std::vector<double> aitken = detail::aitken_sweep(detail::aitken_sweep(tail_ell));
    std::vector<double> logr = detail::log_richardson_sweep(tail_ell, tail_u);
    const double spread_a = detail::tail_spread(aitken);
    const double spread_l = detail::tail_spread(logr);

    if (spread_a <= spread_l) {
        est.method = "aitken";
        est.accelerated = std::move(aitken);
        est.spread = spread_a;
    } else {
        est.method = "log-richardson";
        est.accelerated = std::move(logr);
        est.spread = spread_l;
    }
    est.q_hat = est.accelerated.back();
    est.converged = est.spread <= std::max(1e-6, 5e-4 * std::abs(est.q_hat));
    return est;
}

/// Builds the calculus: hypothesis checks, F0/G0, and the growth exponent.
/// Throws NonMonotoneError / TailDivergentError / NoLimitError as appropriate.
inline Calculus build_calculus(const Nonlinearity& nl, const CalculusConfig& cfg = {}) {
    Calculus calc;
    calc.nl = nl;
    calc.cfg = cfg;

    calc.hypotheses = check_hypotheses(nl, cfg.hypotheses);
    if (!calc.hypotheses.monotone_positive)
        throw NonMonotoneError("build_calculus: " + calc.hypotheses.first_violation);
    if (!calc.hypotheses.tail_integrable)
        throw TailDivergentError("build_calculus: upper tail of 1/f diverges");
    if (!calc.hypotheses.derivative_monotone)
        throw NonMonotoneError("build_calculus: " + calc.hypotheses.first_violation);

    // F0 = int_0^inf ds/f, split at 1; the lower part may diverge (=> F0 = inf).
    if (calc.closed_ok()) {
        calc.F0 = nl.closed_F0();
    } else {
        auto inv_f = [&nl](double s) {
            const double fs = nl.f(s);
            return fs > 0.0 ? 1.0 / fs : kInf;
        };
        const TailIntegral upper = integrate_upper_tail(inv_f, 1.0, cfg.quad_rel_tol);
        if (!upper.converged)
            throw TailDivergentError("build_calculus: upper tail of 1/f diverges");
        const TailIntegral lower = integrate_dyadic_lower(inv_f, 1.0, cfg.quad_rel_tol);
        calc.F0 = lower.converged ? upper.value + lower.value : kInf;
    }
    calc.G0 = calc.F0 == kInf ? 0.0 : 1.0 / calc.F0;

    if (const auto closed = nl.closed_qf(); closed && cfg.use_closed_forms) {
        calc.q_f = *closed;
        calc.qf_from_closed_form = true;
    } else {
        calc.qf_estimate = estimate_qf(calc);
        if (!calc.qf_estimate.converged)
            throw NoLimitError("build_calculus: f'(u) F(u) has no detectable limit "
                               "(spread " +
                               std::to_string(calc.qf_estimate.spread) + ")");
        calc.q_f = calc.qf_estimate.q_hat;
    }
    calc.p_f = calc.q_f <= 1.0 + 1e-12 ? kInf : calc.q_f / (calc.q_f - 1.0);
    return calc;
}

/// Critical exponent for (N, theta).
inline double critical_exponent(int N, double theta) { return 1.0 + theta / N; }

/// Classifies p_f against p_theta = 1 + theta/N with a relative `band` around
/// the boundary reported as Critical.
inline Criticality classify(const Calculus& calc, int N, double theta, double band = 1e-3) {
    const double p_theta = critical_exponent(N, theta);
    if (calc.p_f == kInf) return Criticality::Supercritical;
    if (std::abs(calc.p_f - p_theta) <= band * p_theta) return Criticality::Critical;
    return calc.p_f > p_theta ? Criticality::Supercritical : Criticality::Subcritical;
}

// ---- asymptotic bound verifiers ---------------------------------------------

struct Lemma41Row {
    double sigma = 0.0;
    double F_inv_sigma = 0.0;
    double f_at_F_inv = 0.0;
};

/// Verifies, for eps in (0, q_f), that on the sampled sigma grid
///     C^{-1} sigma^{eps - q_f} <= f(F^{-1}(sigma)) <= C sigma^{-eps - q_f}
///     F^{-1}(sigma) <= C sigma^{1 - q_f - eps}
/// and reports the smallest admissible constant C >= 1.
struct Lemma41Report {
    double C = 1.0;
    double eps = 0.0;
    bool pass = false;
    std::vector<Lemma41Row> rows;
};

inline Lemma41Report verify_growth_envelope(const Calculus& calc, double eps,
                                            double sigma_lo, double sigma_hi,
                                            int points = 40) {
    if (!(eps > 0.0) || eps >= calc.q_f)
        throw DomainError("verify_growth_envelope: eps must lie in (0, q_f)");
    if (!(sigma_lo > 0.0) || !(sigma_hi > sigma_lo) || sigma_hi >= calc.F0)
        throw DomainError("verify_growth_envelope: sigma grid must lie in (0, F0)");
    Lemma41Report rep;
    rep.eps = eps;
    double C = 1.0;
    for (int i = 0; i <= points; ++i) {
        const double sigma = sigma_lo * std::pow(sigma_hi / sigma_lo, double(i) / points);
        Lemma41Row row;
        row.sigma = sigma;
        row.F_inv_sigma = calc.F_inv(sigma);
        row.f_at_F_inv = calc.nl.f(row.F_inv_sigma);
        // lower envelope
        C = std::max(C, std::pow(sigma, eps - calc.q_f) / row.f_at_F_inv);
        // upper envelope
        C = std::max(C, row.f_at_F_inv * std::pow(sigma, eps + calc.q_f));
        // F^{-1} growth
        C = std::max(C, row.F_inv_sigma * std::pow(sigma, calc.q_f - 1.0 + eps));
        rep.rows.push_back(row);
    }
    rep.C = C;
    rep.pass = std::isfinite(C);
    return rep;
}

/// Convexity scan of g(sigma) = F^{-1}(sigma^k) on a uniform grid: returns the
/// largest sigma_star such that the sampled second differences are nonnegative
/// on (0, sigma_star).  The underlying statement needs k >= p_f.
struct ConvexityScan {
    double sigma_star = 0.0;
    double k = 0.0;
    bool convex_everywhere = false;
};

inline ConvexityScan scan_inverse_convexity(const Calculus& calc, double k,
                                            double sigma_max, int points = 200) {
    if (!(k > 0.0)) throw DomainError("scan_inverse_convexity: k must be positive");
    if (!(std::pow(sigma_max, k) < calc.F0))
        throw DomainError("scan_inverse_convexity: sigma_max^k must stay below F0");
    ConvexityScan scan;
    scan.k = k;
    const double h = sigma_max / (points + 1);
    std::vector<double> g(points + 2);
    for (int i = 0; i <= points + 1; ++i) {
        const double sigma = std::max(h * i, h * 1e-6);
        g[i] = calc.F_inv(std::pow(sigma, k));
    }
    scan.sigma_star = sigma_max;
    scan.convex_everywhere = true;
    for (int i = 1; i <= points; ++i) {
        const double second = g[i - 1] - 2.0 * g[i] + g[i + 1];
        const double scale = std::abs(g[i - 1]) + std::abs(g[i]) + std::abs(g[i + 1]);
        if (second < -1e-9 * (scale + 1.0)) {
            scan.sigma_star = h * i;
            scan.convex_everywhere = false;
            break;
        }
    }
    return scan;
}

} // namespace fracheat
