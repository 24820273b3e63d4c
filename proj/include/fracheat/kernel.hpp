#pragma once

// Radial heat kernel of the fractional Laplacian of order theta in (0, 2]:
//
//   K_theta(x, t) = (2 pi)^{-N} \int e^{-t |xi|^theta} e^{i x.xi} dxi,
//
// tabulated at t = 1 and evaluated elsewhere through the exact scaling
//   K_theta(x, t) = t^{-N/theta} K_theta(t^{-1/theta} x, 1).
//
// theta = 2 uses the Gaussian closed form.  For theta < 2 the radial profile
// is computed by one-dimensional Fourier inversion (cosine / Bessel / sine
// transform for N = 1, 2, 3) over half-oscillation panels, each integrated by
// adaptive Simpson and re-verified with halved panels.  The far field is
// replaced by a two-term power fit  c1 r^{-N-theta} + c2 r^{-N-2 theta}
// calibrated in a window where the inversion is still accurate, which also
// supplies closed-form tail mass.  The profile is interpolated with a
// Catmull-Rom cubic in log-log coordinates; total mass and a cumulative
// radial mass table come from Simpson sums over the (log-spaced) grid.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fracheat/errors.hpp"
#include "fracheat/quadrature.hpp"

namespace fracheat {

struct KernelConfig {
    double r_min = 1e-3;
    double r_max = 1e3;
    int pts_per_decade = 120;
    double r_inv = 120.0;        ///< Fourier inversion up to here; fit beyond
    double fit_lo = 30.0;        ///< tail-fit window is [fit_lo, r_inv]
    double quad_tol = 1e-12;     ///< absolute per-panel tolerance
    double envelope_cut = 1e-16; ///< e^{-xi^theta} below this is dropped
    bool self_check = true;      ///< repeat with halved panels and compare
    double self_check_tol = 1e-6; ///< pointwise grade for r <= fit_lo
    double self_check_tol_far = 1e-3; ///< fit-window grade (errors average out)

    [[nodiscard]] bool operator==(const KernelConfig&) const = default;
};

namespace detail {

/// Surface measure of the unit sphere in R^N, N = 1, 2, 3.
inline double sphere_surface(int N) {
    switch (N) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
    }
    throw ConfigError("N", "spatial dimension must be 1, 2, or 3");
}

/// Bessel J0.  Ascending series in extended precision below 12 (the extra
/// mantissa bits absorb the alternating-series cancellation), Hankel
/// asymptotics above; absolute accuracy ~1e-9 or better, ~50ns per call.
inline double bessel_j0(double x) {
    x = std::abs(x);
    if (x < 12.0) {
        const long double q = -0.25L * static_cast<long double>(x) * x;
        long double term = 1.0L, sum = 1.0L;
        for (int k = 1; k < 64; ++k) {
            term *= q / (static_cast<long double>(k) * k);
            sum += term;
            if (std::abs(term) < 1e-19L * std::abs(sum) && k > 4) break;
        }
        return static_cast<double>(sum);
    }
    // Hankel coefficients a_k = prod_{j=1..k}(-(2j-1)^2) / (k! 8^k)
    static const double a[11] = {1.0,
                                 -1.0 / 8,
                                 9.0 / 128,
                                 -75.0 / 1024,
                                 3675.0 / 32768,
                                 -59535.0 / 262144,
                                 2401245.0 / 4194304,
                                 -57972915.0 / 33554432,
                                 13043905875.0 / 2147483648.0,
                                 -418854310875.0 / 17179869184.0,
                                 30241281245175.0 / 274877906944.0};
    const double ix = 1.0 / x;
    double P = 0.0, Q = 0.0, pw = 1.0;
    for (int k = 0; k <= 10; ++k) {
        const double c = a[k] * pw; // a_k / x^k
        const double s = (k / 2) % 2 ? -1.0 : 1.0;
        if (k % 2 == 0) P += s * c;
        else Q += s * c;
        pw *= ix;
    }
    const double chi = x - 0.25 * M_PI;
    return std::sqrt(2.0 / (M_PI * x)) * (P * std::cos(chi) - Q * std::sin(chi));
}

} // namespace detail

class KernelTable {
  public:
    int N = 1;
    double theta = 2.0;
    KernelConfig cfg;

    // Tabulated log-log profile at t = 1 (theta < 2 only); one ghost node on
    // each side supports full cubic stencils across the nominal range.
    std::vector<double> log_r;
    std::vector<double> log_g;
    double gamma0 = 0.0; ///< profile value at r = 0
    double tail_c1 = 0.0;
    double tail_c2 = 0.0;
    double tail_c3 = 0.0;

    // ---- construction -------------------------------------------------------

    static KernelTable build(int N, double theta, const KernelConfig& cfg = {}) {
        if (N < 1 || N > 3) throw ConfigError("N", "spatial dimension must be 1, 2, or 3");
        if (!(theta > 0.0) || theta > 2.0)
            throw ConfigError("theta", "order must lie in (0, 2]");
        KernelTable k;
        k.N = N;
        k.theta = theta;
        k.cfg = cfg;
        if (theta == 2.0) {
            k.gamma0 = std::pow(4.0 * M_PI, -0.5 * N);
            return k; // Gaussian closed form; no table needed
        }

        k.gamma0 = detail::sphere_surface(N) * std::pow(2.0 * M_PI, -N) *
                   std::tgamma(double(N) / theta) / theta;

        const double step = std::pow(10.0, 1.0 / cfg.pts_per_decade);
        const int n_inv =
            static_cast<int>(std::ceil(std::log(cfg.r_inv / cfg.r_min) / std::log(step)));
        // inversion nodes, with one ghost on each side
        std::vector<double> r_nodes;
        for (int i = -1; i <= n_inv + 1; ++i)
            r_nodes.push_back(cfg.r_min * std::pow(step, i));

        std::vector<double> vals = k.invert_profile(r_nodes, 1.0);
        if (cfg.self_check) {
            const std::vector<double> fine = k.invert_profile(r_nodes, 0.5);
            for (std::size_t i = 0; i < vals.size(); ++i) {
                if (vals[i] <= 1e-14 * k.gamma0) continue;
                const double dev = std::abs(fine[i] / vals[i] - 1.0);
                const double grade =
                    r_nodes[i] <= cfg.fit_lo ? cfg.self_check_tol : cfg.self_check_tol_far;
                if (dev > grade)
                    throw QuadratureFailureError(
                        "kernel inversion failed the panel-halving self-check (dev " +
                        std::to_string(dev) + " at r = " + std::to_string(r_nodes[i]) + ")");
            }
            vals = fine; // keep the finer answer
        }

        // Three-term tail fit on [fit_lo, r_inv]:  y = Gamma r^{N+theta} as a
        // quadratic in x = r^{-theta} (centred for conditioning), so the model
        // is c1 r^{-N-theta} + c2 r^{-N-2theta} + c3 r^{-N-3theta}.  Three
        // terms matter: some orders vanish for special theta (e.g. the second
        // one at theta = 1) and small theta decays slowly term to term.
        {
            std::vector<double> xs, ys;
            for (std::size_t i = 0; i < r_nodes.size(); ++i) {
                const double r = r_nodes[i];
                if (r < cfg.fit_lo || r > cfg.r_inv) continue;
                xs.push_back(std::pow(r, -theta));
                ys.push_back(vals[i] * std::pow(r, N + theta));
            }
            const int m = static_cast<int>(xs.size());
            if (m < 12)
                throw ConfigError("kernel.fit_lo", "tail-fit window holds fewer than 12 nodes");
            double xbar = 0;
            for (double x : xs) xbar += x;
            xbar /= m;
            double s[5] = {double(m), 0, 0, 0, 0}, t[3] = {0, 0, 0};
            for (int i = 0; i < m; ++i) {
                const double d = xs[i] - xbar;
                double p = d;
                for (int k2 = 1; k2 <= 4; ++k2, p *= d) s[k2] += p;
                p = 1.0;
                for (int k2 = 0; k2 <= 2; ++k2, p *= d) t[k2] += ys[i] * p;
            }
            // solve the 3x3 normal equations (Cramer)
            const double A[3][3] = {{s[0], s[1], s[2]}, {s[1], s[2], s[3]}, {s[2], s[3], s[4]}};
            auto det3 = [](const double M[3][3]) {
                return M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                       M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                       M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]);
            };
            const double D = det3(A);
            double coef[3];
            for (int c = 0; c < 3; ++c) {
                double Ac[3][3];
                for (int ii = 0; ii < 3; ++ii)
                    for (int jj = 0; jj < 3; ++jj) Ac[ii][jj] = (jj == c) ? t[ii] : A[ii][jj];
                coef[c] = det3(Ac) / D;
            }
            // un-centre: y = a0 + a1 (x - xbar) + a2 (x - xbar)^2
            k.tail_c1 = coef[0] - coef[1] * xbar + coef[2] * xbar * xbar;
            k.tail_c2 = coef[1] - 2.0 * coef[2] * xbar;
            k.tail_c3 = coef[2];
            if (!(k.tail_c1 > 0.0))
                throw QuadratureFailureError("kernel tail fit produced a nonpositive "
                                             "leading coefficient");
        }

        // Assemble the full table: inversion nodes up to r_inv, fitted values
        // beyond (the fit and the inversion agree inside the window).
        for (std::size_t i = 0; i < r_nodes.size(); ++i) {
            const double r = r_nodes[i];
            if (r > cfg.r_inv * step) break;
            k.log_r.push_back(std::log(r));
            k.log_g.push_back(std::log(std::max(vals[i], 1e-300)));
        }
        for (double r = std::exp(k.log_r.back()) * step;; r *= step) {
            k.log_r.push_back(std::log(r));
            k.log_g.push_back(std::log(k.tail_value(r)));
            if (r > cfg.r_max * step) break;
        }
        k.finalize_derived();
        return k;
    }

    /// Rebuilds the derived interpolation/mass state from the public fields.
    /// Must be called after filling a table by deserialization; build() does
    /// it automatically.
    void finalize_derived() {
        if (theta == 2.0 || log_r.size() < 2) return;
        log_step_ = log_r[1] - log_r[0];
        build_cumulative_mass();
    }

    // ---- evaluation ---------------------------------------------------------

    /// Radial profile at t = 1.
    [[nodiscard]] double profile(double r) const {
        r = std::abs(r);
        if (theta == 2.0) return gamma0 * std::exp(-0.25 * r * r);
        const double r_lo = std::exp(log_r[1]);  // first non-ghost node
        if (r <= r_lo) {
            // even function: quadratic blend between Gamma(0) and Gamma(r_lo)
            const double g_lo = std::exp(log_g[1]);
            const double w = (r / r_lo) * (r / r_lo);
            return gamma0 + (g_lo - gamma0) * w;
        }
        if (r >= cfg.r_max) return tail_value(r);
        return std::exp(interp_log(std::log(r)));
    }

    /// Kernel value at radius r and time t > 0 (self-similar scaling).
    [[nodiscard]] double operator()(double r, double t) const {
        const double s = std::pow(t, -1.0 / theta);
        return std::pow(s, N) * profile(r * s);
    }

    /// Total mass of the tabulated profile (exactly 1 for theta = 2).
    [[nodiscard]] double mass() const {
        if (theta == 2.0) return 1.0;
        return mass_within_profile(std::exp(log_r[log_r.size() - 2])) +
               tail_mass_beyond(std::exp(log_r[log_r.size() - 2]));
    }

    /// Mass of K(.,t) inside the ball of radius r.
    [[nodiscard]] double mass_within(double r, double t) const {
        return mass_within_profile(r * std::pow(t, -1.0 / theta));
    }

    /// Average of K(.,t) over the centered cell [-h/2, h/2]^N.  Exact erf-based
    /// product for the Gaussian; for theta < 2 the average over the ball of
    /// equal volume (the profile is radial and the cell is near-isotropic).
    [[nodiscard]] double cell_average_origin(double h, double t) const {
        if (theta == 2.0) {
            const double s = 0.25 * h / std::sqrt(t);
            const double one_d = std::erf(s) / h; // (1/h) * mass in [-h/2, h/2]
            double avg = 1.0;
            for (int d = 0; d < N; ++d) avg *= one_d;
            return avg;
        }
        const double vol = std::pow(h, N);
        const double r_eq = std::pow(vol * N / detail::sphere_surface(N), 1.0 / N);
        return mass_within(r_eq, t) / vol;
    }

    // ---- checks -------------------------------------------------------------

    /// Max relative Chapman-Kolmogorov deviation | K(.,s) * K(.,t-s) - K(.,t) |
    /// over the centre quarter of an M-cell grid on [-L, L] (N = 1 discrete
    /// convolution; independent of the FFT machinery).
    [[nodiscard]] double chapman_kolmogorov_deviation(double t, double s, double L,
                                                      int M) const {
        if (!(s > 0.0) || !(s < t))
            throw ConfigError("kernel.ck.s", "intermediate time must lie in (0, t)");
        const double h = 2.0 * L / M;
        std::vector<double> A(M), off(2 * M - 1);
        for (int i = 0; i < M; ++i) A[i] = (*this)(-L + (i + 0.5) * h, s);
        for (int d = -(M - 1); d <= M - 1; ++d) off[d + M - 1] = (*this)(d * h, t - s);
        double worst = 0.0;
        for (int i = 0; i < M; ++i) {
            const double x = -L + (i + 0.5) * h;
            if (std::abs(x) > 0.25 * L) continue;
            double conv = 0.0;
            for (int j = 0; j < M; ++j) conv += A[j] * off[i - j + M - 1];
            conv *= h;
            const double exact = (*this)(x, t);
            worst = std::max(worst, std::abs(conv - exact) / exact);
        }
        return worst;
    }

    /// Smallest C with C^{-1} B <= profile <= C B for B(r) = (1 + r)^{-N-theta}
    /// over the tabulated range (theta < 2 only).  Throws BoundViolationError
    /// beyond 1e6.
    [[nodiscard]] double bound_constant() const {
        if (theta == 2.0)
            throw DomainError("bound_constant: two-sided power bound applies to theta < 2");
        double C = 1.0;
        auto absorb = [&C](double gamma, double envelope) {
            C = std::max({C, gamma / envelope, envelope / gamma});
        };
        absorb(gamma0, 1.0);
        for (std::size_t i = 1; i + 1 < log_r.size(); ++i) {
            const double r = std::exp(log_r[i]);
            absorb(std::exp(log_g[i]), std::pow(1.0 + r, -double(N) - theta));
        }
        if (C > 1e6)
            throw BoundViolationError("kernel profile violates the power envelope (C = " +
                                      std::to_string(C) + ")");
        return C;
    }

    [[nodiscard]] double tail_value(double r) const {
        const double x = std::pow(r, -theta);
        return std::pow(r, -double(N) - theta) * (tail_c1 + x * (tail_c2 + x * tail_c3));
    }

  private:
    double log_step_ = 0.0;
    std::vector<double> cum_mass_; ///< radial mass inside r at non-ghost nodes

    /// Catmull-Rom in (log r, log Gamma); clamped to neighbour values to keep
    /// the interpolant inside the data envelope.
    [[nodiscard]] double interp_log(double lr) const {
        const double pos = (lr - log_r[0]) / log_step_;
        std::size_t j = static_cast<std::size_t>(pos);
        j = std::min(std::max<std::size_t>(j, 1), log_r.size() - 3);
        const double u = pos - j;
        const double y0 = log_g[j - 1], y1 = log_g[j], y2 = log_g[j + 1], y3 = log_g[j + 2];
        const double a = -0.5 * y0 + 1.5 * y1 - 1.5 * y2 + 0.5 * y3;
        const double b = y0 - 2.5 * y1 + 2.0 * y2 - 0.5 * y3;
        const double c = -0.5 * y0 + 0.5 * y2;
        double y = ((a * u + b) * u + c) * u + y1;
        y = std::min(y, std::max(y1, y2));
        y = std::max(y, std::min(y1, y2));
        return y;
    }

    /// Fourier inversion of the radial profile at the given radii.
    /// `panel_scale` < 1 shrinks panels (used by the self-check).
    [[nodiscard]] std::vector<double> invert_profile(const std::vector<double>& radii,
                                                     double panel_scale) const {
        const double xi_max = std::pow(-std::log(cfg.envelope_cut), 1.0 / theta);
        std::vector<double> out(radii.size());
        for (std::size_t idx = 0; idx < radii.size(); ++idx) {
            const double r = radii[idx];
            auto integrand = [&](double xi) {
                const double env = std::exp(-std::pow(xi, theta));
                switch (N) {
                    case 1: return env * std::cos(r * xi);
                    case 2: return env * xi * detail::bessel_j0(r * xi);
                    default: return env * xi * std::sin(r * xi);
                }
            };
            const int panels = std::max(
                8, static_cast<int>(std::ceil(xi_max * r / (M_PI * panel_scale))));
            const double w = xi_max / panels;
            double sum = 0.0;
            for (int p = 0; p < panels; ++p) {
                // tolerance scaled to the local envelope so that errors from the
                // many cancelling oscillation panels cannot pile up against a
                // small net integral
                const double env = std::exp(-std::pow(p * w, theta));
                const double tol = cfg.quad_tol * std::max(env, 1e-4);
                sum += adaptive_simpson(integrand, p * w, (p + 1) * w, tol, 36);
            }
            switch (N) {
                case 1: out[idx] = sum / M_PI; break;
                case 2: out[idx] = sum / (2.0 * M_PI); break;
                default: out[idx] = sum / (2.0 * M_PI * M_PI * r); break;
            }
        }
        return out;
    }

    void build_cumulative_mass() {
        // Simpson over log-radius segments, profile interpolated at midpoints:
        //   dM = S_{N-1} Gamma(r) r^{N} dlog r.
        const std::size_t n = log_r.size();
        cum_mass_.assign(n, 0.0);
        const double S = detail::sphere_surface(N);
        const double r1 = std::exp(log_r[1]);
        // centre piece: quadratic-blend profile integrated over [0, r1]
        {
            auto f = [&](double r) { return S * profile(r) * std::pow(r, N - 1); };
            cum_mass_[1] = adaptive_simpson(f, 0.0, r1, 1e-14 * gamma0, 30);
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double la = log_r[i], lb = log_r[i + 1];
            auto g = [&](double lr) {
                const double r = std::exp(lr);
                return S * std::exp(interp_log(lr)) * std::pow(r, N);
            };
            const double lm = 0.5 * (la + lb);
            const double seg = (lb - la) / 6.0 * (g(la) + 4.0 * g(lm) + g(lb));
            cum_mass_[i + 1] = cum_mass_[i] + seg;
        }
        cum_mass_[0] = 0.0;
    }

    [[nodiscard]] double tail_mass_beyond(double r) const {
        const double S = detail::sphere_surface(N);
        const double x = std::pow(r, -theta);
        return (S / theta) * x * (tail_c1 + x * (0.5 * tail_c2 + x * tail_c3 / 3.0));
    }

    [[nodiscard]] double mass_within_profile(double rho) const {
        if (theta == 2.0) {
            switch (N) {
                case 1: return std::erf(0.5 * rho);
                case 2: return 1.0 - std::exp(-0.25 * rho * rho);
                default:
                    return std::erf(0.5 * rho) -
                           rho * std::exp(-0.25 * rho * rho) / std::sqrt(M_PI);
            }
        }
        const double lr = std::log(rho);
        if (lr <= log_r[1]) {
            // quadratic-blend region
            const double r1 = std::exp(log_r[1]);
            const double g1 = std::exp(log_g[1]);
            const double S = detail::sphere_surface(N);
            const double a = (g1 - gamma0) / (r1 * r1);
            return S * (gamma0 * std::pow(rho, N) / N +
                        a * std::pow(rho, N + 2) / (N + 2));
        }
        if (lr >= log_r[log_r.size() - 2]) {
            const double edge = std::exp(log_r[log_r.size() - 2]);
            return cum_mass_[log_r.size() - 2] + tail_mass_beyond(edge) -
                   tail_mass_beyond(std::max(rho, edge));
        }
        // Simpson from the bracketing node to the query radius, with the
        // profile interpolant as integrand
        const double pos = (lr - log_r[0]) / log_step_;
        const std::size_t j = static_cast<std::size_t>(pos);
        const double S = detail::sphere_surface(N);
        auto g = [&](double l) { return S * std::exp(interp_log(l)) * std::exp(l * N); };
        const double la = log_r[j];
        const double lm = 0.5 * (la + lr);
        return cum_mass_[j] + (lr - la) / 6.0 * (g(la) + 4.0 * g(lm) + g(lr));
    }
};

} // namespace fracheat
