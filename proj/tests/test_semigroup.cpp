#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fracheat/calculus.hpp"
#include "fracheat/semigroup.hpp"

using namespace fracheat;

namespace {

const KernelTable& gauss1() {
    static const KernelTable k = KernelTable::build(1, 2.0, {});
    return k;
}

const KernelTable& cauchy1() {
    static const KernelTable k = KernelTable::build(1, 1.0, {});
    return k;
}

double indicator_ball(double x) { return std::abs(x) <= 1.0 ? 1.0 : 0.0; }

/// Exact Gaussian evolution of the indicator of [-1, 1].
double erf_profile(double x, double t) {
    const double s = 2.0 * std::sqrt(t);
    return 0.5 * (std::erf((x + 1.0) / s) - std::erf((x - 1.0) / s));
}

double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("gaussian evolution of an indicator matches the erf closed form") {
    const double t = 0.25;
    auto run = [&](int M) {
        const auto u0 = discretize(8.0, M, indicator_ball);
        const auto ut = apply_semigroup(gauss1(), u0, t);
        double worst = 0.0;
        for (int i = 0; i < M; ++i)
            worst = std::max(worst, std::abs(ut.values[i] - erf_profile(ut.center(i), t)));
        return worst;
    };
    const double e256 = run(256);
    const double e1024 = run(1024);
    CHECK(e256 < 2e-4); // midpoint sampling of the kernel: O(h^2)
    CHECK(e1024 < e256 / 6.0); // second-order convergence under refinement
}

TEST_CASE("fft convolution equals the direct quadrature sum") {
    const int M = 256;
    const double L = 8.0, t = 0.25;
    const auto& k = gauss1();
    const auto u0 = discretize(L, M, [](double x) { return std::exp(-x * x) + indicator_ball(x); });
    const auto ut = apply_semigroup(k, u0, t);
    const double h = u0.h();
    const double w0 = h * k.cell_average_origin(h, t);
    for (int i = 0; i < M; ++i) {
        double direct = 0.0;
        for (int j = 0; j < M; ++j) {
            const double w = (i == j) ? w0 : h * k(h * std::abs(i - j), t);
            direct += w * u0.values[j];
        }
        CHECK(ut.values[i] == Catch::Approx(direct).margin(1e-12));
    }
}

TEST_CASE("constant data propagates exactly through the background split") {
    const double c = 2.75;
    GridField u = discretize(40.0, 128, [&](double) { return c; }, c);
    const auto& k = cauchy1();
    const auto ut = apply_semigroup(k, u, 0.5);
    const double expect = c * k.mass();
    CHECK(ut.background == expect);
    for (double v : ut.values) CHECK(v == Catch::Approx(expect).margin(1e-13));
}

TEST_CASE("two short steps compose into one long step") {
    SECTION("gaussian kernel: composition to the origin-cell consistency term") {
        // midpoint-sampled gaussians compose spectrally exactly; replacing the
        // origin cell by its exact average perturbs each step by O(h^3 K'')
        const auto u0 = discretize(8.0, 256, [](double x) { return std::exp(-x * x / 4.0); });
        SemigroupOperator op(gauss1(), 1, 8.0, 256);
        const auto two = op.apply(op.apply(u0, 0.1), 0.1);
        const auto one = op.apply(u0, 0.2);
        CHECK(sup_abs_diff(two.values, one.values) < 2e-4);
    }
    SECTION("tabulated kernel: composition within the quadrature budget") {
        const auto u0 = discretize(40.0, 2048, [](double x) { return std::exp(-x * x / 4.0); });
        SemigroupOperator op(cauchy1(), 1, 40.0, 2048);
        const auto two = op.apply(op.apply(u0, 0.25), 0.25);
        const auto one = op.apply(u0, 0.5);
        CHECK(sup_abs_diff(two.values, one.values) < 1e-3);
    }
}

TEST_CASE("order preservation and positivity") {
    const auto lo = discretize(40.0, 1024, [](double x) { return std::exp(-x * x); });
    const auto hi = discretize(40.0, 1024, [](double x) {
        return std::exp(-x * x) + 0.7 * std::exp(-(x - 3.0) * (x - 3.0));
    });
    SemigroupOperator op(cauchy1(), 1, 40.0, 1024);
    const auto slo = op.apply(lo, 0.3);
    const auto shi = op.apply(hi, 0.3);
    for (std::size_t i = 0; i < slo.values.size(); ++i) {
        CHECK(slo.values[i] >= 0.0);
        CHECK(slo.values[i] <= shi.values[i] + 1e-12);
    }
}

TEST_CASE("convex transforms vanishing at zero commute sub-additively") {
    // Phi = G^beta with Phi(0) = 0 and Phi convex: applying Phi after the
    // evolution never exceeds evolving Phi of the data (discrete weights are
    // nonnegative with total mass <= 1).
    struct Case {
        Nonlinearity nl;
        double beta;
        const KernelTable* k;
        double L;
        int M;
        double t;
        std::function<double(double)> data;
    };
    const std::vector<Case> cases = {
        {Nonlinearity::power(3.0), 1.0, &gauss1(), 8.0, 256, 0.25,
         [](double x) { return 2.0 * std::exp(-x * x); }},
        {Nonlinearity::power(2.0), 2.0, &gauss1(), 8.0, 256, 0.5,
         [](double x) {
             return std::exp(-(x - 1.0) * (x - 1.0)) + 0.5 * std::exp(-(x + 2.0) * (x + 2.0));
         }},
        {Nonlinearity::power(4.0), 1.0, &cauchy1(), 40.0, 2048, 0.25,
         [](double x) { return 1.5 * indicator_ball(x); }},
    };
    for (const auto& c : cases) {
        const auto calc = build_calculus(c.nl);
        auto phi = [&](double v) { return std::pow(calc.G(v), c.beta); };
        const auto mu = discretize(c.L, c.M, c.data);
        GridField phi_mu = mu;
        for (double& v : phi_mu.values) v = phi(v);
        SemigroupOperator op(*c.k, 1, c.L, c.M);
        const auto smu = op.apply(mu, c.t);
        const auto sphi = op.apply(phi_mu, c.t);
        for (std::size_t i = 0; i < smu.values.size(); ++i) {
            const double lhs = phi(smu.values[i]);
            const double rhs = sphi.values[i];
            CHECK(lhs <= rhs + 1e-8 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("window guard aborts when kernel mass escapes the box") {
    SemigroupOperator op(cauchy1(), 1, 40.0, 512);
    // heavy-tailed kernel: ~1.59% of the mass at t = 1 lies beyond |x| = 40
    CHECK(op.leak(1.0) == Catch::Approx(1.59155e-2).epsilon(1e-3));
    const auto u0 = discretize(40.0, 512, [](double x) { return std::exp(-x * x); });
    CHECK_THROWS_AS(op.apply(u0, 1.0), WindowTooSmallError);
    CHECK_NOTHROW(op.apply(u0, 0.5)); // leak ~0.8% stays under the 1% limit
}

TEST_CASE("mass accounting under window truncation") {
    const auto u0 = discretize(40.0, 1024, [](double x) { return std::exp(-x * x / 2.0); });
    SemigroupOperator op(cauchy1(), 1, 40.0, 1024);
    const auto ut = op.apply(u0, 0.5);
    const double h = u0.h();
    double m_in = 0.0, m_out = 0.0;
    for (double v : u0.values) m_in += v * h;
    for (double v : ut.values) m_out += v * h;
    const double deficit = m_in * cauchy1().mass() - m_out;
    CHECK(deficit >= -1e-9);          // the evolution never creates mass
    CHECK(deficit <= 0.01 * m_in);    // and loses at most the window leak
}

TEST_CASE("sup-norm decay constant") {
    SECTION("indicator data") {
        const auto u0 = discretize(8.0, 256, indicator_ball);
        const double C = check_decay_estimate(gauss1(), u0, {0.25, 0.5, 1.0});
        CHECK(C > 0.3);
        CHECK(C < 0.55);
    }
    SECTION("a single-cell spike stays bounded") {
        GridField u0 = discretize(8.0, 256, [](double) { return 0.0; });
        u0.values[100] = 1.0 / u0.h(); // unit mass concentrated in one cell
        const double C = check_decay_estimate(gauss1(), u0, {0.25, 0.5});
        CHECK(C > 0.0);
        CHECK(C < 0.3);
    }
    SECTION("zero data gives a zero constant") {
        const auto u0 = discretize(8.0, 256, [](double) { return 0.0; });
        CHECK(check_decay_estimate(gauss1(), u0, {0.25, 1.0}) == 0.0);
    }
    SECTION("non-decaying data is rejected") {
        const auto u0 = discretize(8.0, 256, [](double) { return 1.0; }, 1.0);
        CHECK_THROWS_AS(check_decay_estimate(gauss1(), u0, {0.5}), DomainError);
    }
}

TEST_CASE("one-shot wrapper and operator agree bitwise") {
    const auto u0 = discretize(8.0, 128, [](double x) { return std::exp(-x * x); });
    SemigroupOperator op(gauss1(), 1, 8.0, 128);
    const auto a = op.apply(u0, 0.3);
    const auto b = apply_semigroup(gauss1(), u0, 0.3);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    CHECK(a.background == b.background);
}

TEST_CASE("geometry and argument validation") {
    const auto u0 = discretize(8.0, 128, [](double x) { return std::exp(-x * x); });
    CHECK_THROWS_AS(SemigroupOperator(gauss1(), 1, 8.0, 100), ConfigError); // not a power of two
    const KernelTable planar = KernelTable::build(2, 2.0, {});
    CHECK_THROWS_AS(SemigroupOperator(planar, 1, 8.0, 128), ConfigError); // dimension mismatch
    SemigroupOperator op(gauss1(), 1, 8.0, 128);
    CHECK_THROWS_AS(op.apply(u0, 0.0), DomainError);
    CHECK_THROWS_AS(op.apply(u0, -1.0), DomainError);
    const auto other = discretize(4.0, 128, [](double x) { return std::exp(-x * x); });
    CHECK_THROWS_AS(op.apply(other, 0.1), ConfigError); // wrong half-width
}
