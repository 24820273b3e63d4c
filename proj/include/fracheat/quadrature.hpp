#pragma once

// Quadrature building blocks shared by the calculus and kernel modules:
//
//  * adaptive_simpson      -- classic recursive Simpson with error recycling
//  * integrate_upper_tail  -- \int_a^inf via doubling blocks + geometric
//                             extrapolation of the remainder
//  * integrate_dyadic_lower -- \int_0^b for integrands with an integrable
//                             endpoint singularity, via geometric panels
//
// All routines are deterministic and allocation-free on the hot path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "fracheat/errors.hpp"

namespace fracheat {

struct TailIntegral {
    double value = 0.0;      ///< total integral estimate
    double remainder = 0.0;  ///< extrapolated mass beyond the last block
    bool converged = false;  ///< block ratios settled below 1
    int blocks = 0;          ///< doubling blocks actually used
};

namespace detail {

inline double simpson_panel(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <typename F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_panel(a, fa, m, fm, flm);
    const double right = simpson_panel(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

/// Adaptive Simpson on [a, b].  `tol` is absolute; pass something proportional
/// to the expected magnitude for relative control.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = detail::simpson_panel(a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole,
                                        std::max(tol, 1e-300), max_depth);
}

/// Adaptive Simpson with relative tolerance: a coarse composite pass sizes the
/// magnitude, then the adaptive pass runs with the matching absolute tolerance.
template <typename F>
double adaptive_simpson_rel(F&& f, double a, double b, double rel_tol, int max_depth = 48) {
    if (!(b > a)) return 0.0;
    const int n = 16;
    const double h = (b - a) / n;
    double rough = 0.0;
    double x0 = a;
    double f0 = f(x0);
    for (int i = 0; i < n; ++i) {
        const double x1 = a + (i + 1) * h;
        const double f1 = f(x1);
        rough += detail::simpson_panel(x0, f0, x1, f1, f(0.5 * (x0 + x1)));
        x0 = x1;
        f0 = f1;
    }
    double scale = std::abs(rough);
    if (scale == 0.0 || !std::isfinite(scale)) scale = 1.0;
    return adaptive_simpson(f, a, b, rel_tol * scale, max_depth);
}

/// Integrates f over [a, inf).  Blocks [a, 2a], [2a, 4a], ... are summed until the
/// running block ratio allows a geometric remainder estimate below `rel_tol` of the
/// total.  Fails soft: `converged == false` means the ratios never settled below 1
/// (the tail plausibly diverges); the caller decides whether that is an error.
template <typename F>
TailIntegral integrate_upper_tail(F&& f, double a, double rel_tol = 1e-11,
                                  int max_blocks = 60) {
    TailIntegral out;
    if (a <= 0.0) a = std::numeric_limits<double>::min();
    double lo = a;
    double total = 0.0;
    double prev_block = -1.0;
    for (int k = 0; k < max_blocks; ++k) {
        const double hi = 2.0 * lo;
        const double block = adaptive_simpson_rel(f, lo, hi, rel_tol * 0.1);
        total += block;
        out.blocks = k + 1;
        if (prev_block > 0.0 && block > 0.0) {
            const double ratio = block / prev_block;
            if (ratio < 0.95) {
                const double rem = block * ratio / (1.0 - ratio);
                if (rem <= rel_tol * std::max(total, std::numeric_limits<double>::min()) ||
                    rem <= 1e-300) {
                    out.value = total + rem;
                    out.remainder = rem;
                    out.converged = true;
                    return out;
                }
            }
        }
        if (block == 0.0) {
            // Integrand underflowed to zero over the whole block: nothing left.
            out.value = total;
            out.remainder = 0.0;
            out.converged = true;
            return out;
        }
        prev_block = block;
        lo = hi;
    }
    out.value = total;
    out.remainder = std::numeric_limits<double>::quiet_NaN();
    out.converged = false;
    return out;
}

/// Integrates f over (0, b] when f may blow up at 0.  Panels [b/2^{k+1}, b/2^k]
/// are handled by composite Simpson with `sub` subpanels; once the panel ratio
/// settles the remaining mass toward 0 is extrapolated geometrically.  A panel
/// ratio pinned at or above 1 marks the integral as divergent
/// (`converged == false`).
template <typename F>
TailIntegral integrate_dyadic_lower(F&& f, double b, double rel_tol = 1e-12,
                                    int max_levels = 64, int sub = 32) {
    TailIntegral out;
    double total = 0.0;
    double hi = b;
    double prev_panel = -1.0;
    double prev_ratio = -1.0;
    for (int level = 0; level < max_levels; ++level) {
        const double lo = 0.5 * hi;
        const double h = (hi - lo) / sub;
        double panel = 0.0;
        double x0 = lo;
        double f0 = f(x0);
        for (int i = 0; i < sub; ++i) {
            const double x1 = lo + (i + 1) * h;
            const double xm = 0.5 * (x0 + x1);
            const double f1 = f(x1);
            panel += h / 6.0 * (f0 + 4.0 * f(xm) + f1);
            x0 = x1;
            f0 = f1;
        }
        total += panel;
        out.blocks = level + 1;
        if (panel == 0.0) {
            out.value = total;
            out.converged = true;
            return out;
        }
        if (prev_panel > 0.0) {
            const double ratio = panel / prev_panel;
            if (ratio < 0.9995) {
                const double rem = panel * ratio / (1.0 - ratio);
                // Accept early when the ratio has locked (exact for power
                // singularities), otherwise once the remainder is negligible.
                const bool ratio_locked =
                    prev_ratio > 0.0 && std::abs(ratio - prev_ratio) <= 1e-6 * ratio &&
                    level >= 4;
                if (ratio_locked || rem <= rel_tol * std::max(std::abs(total), 1e-300)) {
                    out.value = total + rem;
                    out.remainder = rem;
                    out.converged = true;
                    return out;
                }
                prev_ratio = ratio;
            } else {
                prev_ratio = -1.0;
            }
        }
        prev_panel = panel;
        hi = lo;
    }
    // Panels never became negligible: either genuinely divergent (ratio >= 1)
    // or so close to the integrability border that we refuse to extrapolate.
    out.value = total;
    out.remainder = std::numeric_limits<double>::quiet_NaN();
    out.converged = false;
    return out;
}

/// Simple bisection for a continuous monotone predicate; returns the point where
/// `f` crosses zero within [lo, hi].  Throws BracketFailureError when the inputs
/// do not bracket a sign change.
template <typename F>
double bisect(F&& f, double lo, double hi, int max_iter = 200, double rel_tol = 1e-14) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0))
        throw BracketFailureError("bisect: endpoints do not bracket a sign change");
    for (int i = 0; i < max_iter; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) return mid; // ran out of doubles
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= rel_tol * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace fracheat
