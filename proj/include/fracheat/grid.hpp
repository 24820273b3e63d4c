#pragma once

// Uniform cell-centered grids on [-L, L]^dim holding nonnegative data fields.
// The origin sits on a cell corner (points per axis is even), so data with a
// declared singularity at 0 are finite at every cell center; the cells whose
// closure touches the origin get their cell average instead of a center
// sample.  Outside the box a field takes a constant background value.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "fracheat/errors.hpp"
#include "fracheat/quadrature.hpp"

namespace fracheat {

enum class SingularCellPolicy { None, OriginAverage };

/// Declares that the data behave like |x|^{-exponent} near the origin.
struct SingularityMark {
    bool present = false;
    double exponent = 0.0;
};

struct GridField {
    int dim = 1;
    double half_width = 1.0;
    int points = 2; ///< per axis, power of two
    std::vector<double> values;
    double background = 0.0; ///< field value outside the box
    SingularCellPolicy policy = SingularCellPolicy::None;

    [[nodiscard]] double h() const { return 2.0 * half_width / points; }
    [[nodiscard]] double center(int i) const { return -half_width + (i + 0.5) * h(); }
    [[nodiscard]] std::size_t size() const { return values.size(); }

    [[nodiscard]] std::size_t flat(const std::array<int, 3>& idx) const {
        std::size_t r = 0;
        for (int d = 0; d < dim; ++d) r = r * points + idx[d];
        return r;
    }

    [[nodiscard]] double sup() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return std::max(m, background);
    }

    [[nodiscard]] double min_value() const {
        double m = values.empty() ? background : values[0];
        for (double v : values) m = std::min(m, v);
        return m;
    }

    void check_invariants() const {
        if (dim < 1 || dim > 3) throw ConfigError("grid.dim", "dimension must be 1, 2, or 3");
        if (points < 2 || (points & (points - 1)) != 0)
            throw ConfigError("grid.points", "points per axis must be a power of two >= 2");
        if (!(half_width > 0.0))
            throw ConfigError("grid.half_width", "half width must be positive");
        std::size_t want = 1;
        for (int d = 0; d < dim; ++d) want *= points;
        if (values.size() != want)
            throw ConfigError("grid.values", "value count does not match points^dim");
        for (double v : values)
            if (!std::isfinite(v) || v < 0.0)
                throw ConfigError("grid.values", "field values must be finite and nonnegative");
        if (!std::isfinite(background) || background < 0.0)
            throw ConfigError("grid.background", "background must be finite and nonnegative");
    }
};

/// 64-bit FNV-1a over the field's geometry and raw value bytes; experiment
/// outputs reference fields by this hash.
inline std::uint64_t content_hash(const GridField& g) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    mix(&g.dim, sizeof g.dim);
    mix(&g.half_width, sizeof g.half_width);
    mix(&g.points, sizeof g.points);
    mix(&g.background, sizeof g.background);
    if (!g.values.empty()) mix(g.values.data(), g.values.size() * sizeof(double));
    return h;
}

namespace detail {

/// Average over the 1-D cell [0, h] of a function with an integrable
/// singularity at the 0 endpoint.
template <class F>
double singular_cell_average_1d(F&& f, double h) {
    const TailIntegral ti = integrate_dyadic_lower(f, h);
    if (!ti.converged)
        throw NonIntegrableSingularityError(
            "cell average toward the origin does not converge");
    return ti.value / h;
}

} // namespace detail

/// Builds a GridField by cell-center sampling of `f`; the 2^dim cells touching
/// the origin get averaged instead when `mark.present` (exactly integrated in
/// 1-D; midpoint-of-quarter-cells quadrature for dim >= 2).  The declared
/// local exponent must satisfy a < dim for integrability.
inline GridField discretize(int dim, double half_width, int points,
                            const std::function<double(std::array<double, 3>)>& f,
                            double background = 0.0, SingularityMark mark = {}) {
    GridField g;
    g.dim = dim;
    g.half_width = half_width;
    g.points = points;
    g.background = background;
    g.policy = mark.present ? SingularCellPolicy::OriginAverage : SingularCellPolicy::None;
    if (mark.present && mark.exponent >= double(dim))
        throw NonIntegrableSingularityError(
            "declared singularity exponent " + std::to_string(mark.exponent) +
            " is not integrable in dimension " + std::to_string(dim));
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(points);
    g.values.resize(total);

    const double h = g.h();
    const int mid = points / 2; // origin lies at the corner between mid-1 and mid
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rem = lin;
        for (int d = dim - 1; d >= 0; --d) {
            idx[d] = static_cast<int>(rem % points);
            rem /= points;
        }
        bool singular_cell = mark.present;
        for (int d = 0; d < dim; ++d)
            singular_cell = singular_cell && (idx[d] == mid - 1 || idx[d] == mid);
        std::array<double, 3> x{0, 0, 0};
        for (int d = 0; d < dim; ++d) x[d] = g.center(idx[d]);

        if (!singular_cell) {
            g.values[lin] = f(x);
            continue;
        }
        if (dim == 1) {
            // cell [0, h] or [-h, 0]; integrate toward the singular corner
            const bool right = idx[0] == mid;
            auto along = [&](double s) {
                return f({right ? s : -s, 0.0, 0.0});
            };
            g.values[lin] = detail::singular_cell_average_1d(along, h);
        } else {
            // quarter-cell midpoints: 2^dim samples per cell
            double acc = 0.0;
            const int corners = 1 << dim;
            for (int c = 0; c < corners; ++c) {
                std::array<double, 3> q{0, 0, 0};
                for (int d = 0; d < dim; ++d) {
                    const double lo = g.center(idx[d]) - 0.5 * h;
                    q[d] = lo + (((c >> d) & 1) ? 0.75 : 0.25) * h;
                }
                acc += f(q);
            }
            g.values[lin] = acc / corners;
        }
    }
    g.check_invariants();
    return g;
}

/// Convenience 1-D overload.
inline GridField discretize(double half_width, int points,
                            const std::function<double(double)>& f, double background = 0.0,
                            SingularityMark mark = {}) {
    return discretize(
        1, half_width, points, [&f](std::array<double, 3> x) { return f(x[0]); }, background,
        mark);
}

} // namespace fracheat
