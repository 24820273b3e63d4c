#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fracheat/kernel.hpp"

using namespace fracheat;

namespace {
double poisson1(double r) { return 1.0 / (M_PI * (1.0 + r * r)); }
double poisson2(double r) { return std::pow(1.0 + r * r, -1.5) / (2.0 * M_PI); }
double poisson3(double r) { return std::pow(1.0 + r * r, -2.0) / (M_PI * M_PI); }

const KernelTable& cauchy_kernel() {
    static const KernelTable k = KernelTable::build(1, 1.0);
    return k;
}
} // namespace

TEST_CASE("theta=1, N=1 profile matches the Poisson closed form") {
    const auto& k = cauchy_kernel();
    CHECK(k.gamma0 == Catch::Approx(1.0 / M_PI).epsilon(1e-12));
    double worst = 0.0;
    for (double r = 1e-3; r <= 20.0; r *= 1.05)
        worst = std::max(worst, std::abs(k.profile(r) / poisson1(r) - 1.0));
    CHECK(worst < 1e-5); // actual ~8e-8
    // the fitted far field stays accurate too
    for (double r = 50.0; r < 1e3; r *= 2.1)
        CHECK(k.profile(r) == Catch::Approx(poisson1(r)).epsilon(1e-5));
}

TEST_CASE("unit mass and cumulative mass") {
    const auto& k = cauchy_kernel();
    CHECK(std::abs(k.mass() - 1.0) < 1e-7); // actual ~4e-10
    // mass_within against (2/pi) atan(r)
    for (double r = 0.01; r < 800.0; r *= 2.7) {
        const double exact = 2.0 / M_PI * std::atan(r);
        CHECK(k.mass_within(r, 1.0) == Catch::Approx(exact).margin(1e-8));
    }
    // scaling: mass inside r at time t = mass inside r/t at time 1
    CHECK(k.mass_within(3.0, 2.0) == Catch::Approx(2.0 / M_PI * std::atan(1.5)).margin(1e-8));
}

TEST_CASE("self-similar scaling at arbitrary times") {
    const auto& k = cauchy_kernel();
    for (double t : {0.01, 0.3, 2.0, 50.0})
        for (double x = 0.1; x < 25.0; x *= 2.9) {
            const double exact = t / (M_PI * (t * t + x * x));
            CHECK(k(x, t) == Catch::Approx(exact).epsilon(1e-5));
        }
}

TEST_CASE("tail fit recovers the true expansion coefficients") {
    const auto& k = cauchy_kernel();
    // Poisson: Gamma = (1/pi)(r^-2 - r^-4 + ...) => c1 = 1/pi, c2 = 0, c3 = -1/pi
    CHECK(k.tail_c1 == Catch::Approx(1.0 / M_PI).epsilon(1e-4));
    CHECK(std::abs(k.tail_c2) < 1e-3);
    CHECK(k.tail_c3 == Catch::Approx(-1.0 / M_PI).epsilon(0.05));
}

TEST_CASE("two-sided power envelope constant") {
    const auto& k = cauchy_kernel();
    // For the Poisson profile, sup (1+r)^{N+theta} Gamma weighted both ways is pi
    CHECK(k.bound_constant() == Catch::Approx(M_PI).margin(1e-3));
    CHECK(k.bound_constant() <= 100.0);
    const auto k15 = KernelTable::build(1, 1.5);
    CHECK(k15.bound_constant() <= 100.0);
    CHECK_THROWS_AS(KernelTable::build(1, 2.0).bound_constant(), DomainError);
}

TEST_CASE("Chapman-Kolmogorov on a discrete window") {
    const auto& k = cauchy_kernel();
    const double dev = k.chapman_kolmogorov_deviation(1.0, 0.5, 40.0, 2048);
    CHECK(dev < 1e-3); // actual ~1e-4, limited by window truncation
    // widening the window and refining the grid shrinks the deviation
    const double dev2 = k.chapman_kolmogorov_deviation(1.0, 0.5, 80.0, 8192);
    CHECK(dev2 < 0.5 * dev);
}

TEST_CASE("theta = 1.5 structure") {
    const auto k = KernelTable::build(1, 1.5);
    CHECK(std::abs(k.mass() - 1.0) < 1e-7); // actual ~2e-9
    CHECK(k.chapman_kolmogorov_deviation(1.0, 0.4, 40.0, 2048) < 1e-3);
    // profile positive and radially decreasing on the table range
    double prev = k.profile(1e-3);
    for (double r = 2e-3; r < 900.0; r *= 1.31) {
        const double cur = k.profile(r);
        CHECK(cur > 0.0);
        CHECK(cur <= prev * (1.0 + 1e-12));
        prev = cur;
    }
}

TEST_CASE("theta = 2 closed forms") {
    const auto k = KernelTable::build(1, 2.0);
    CHECK(k.mass() == 1.0);
    CHECK(k.profile(0.0) == Catch::Approx(std::pow(4.0 * M_PI, -0.5)).epsilon(1e-15));
    CHECK(k.profile(1.0) ==
          Catch::Approx(std::exp(-0.25) / std::sqrt(4.0 * M_PI)).epsilon(1e-15));
    CHECK(k(2.0, 4.0) ==
          Catch::Approx(std::pow(16.0 * M_PI, -0.5) * std::exp(-0.25)).epsilon(1e-14));
    CHECK(k.chapman_kolmogorov_deviation(0.5, 0.25, 40.0, 2048) < 1e-12);
    CHECK(k.mass_within(2.0, 1.0) == Catch::Approx(std::erf(1.0)).epsilon(1e-14));
}

TEST_CASE("N = 2 and N = 3 Cauchy profiles") {
    const auto k2 = KernelTable::build(2, 1.0);
    for (double r = 0.01; r < 100.0; r *= 3.3)
        CHECK(k2.profile(r) == Catch::Approx(poisson2(r)).epsilon(1e-4));
    CHECK(std::abs(k2.mass() - 1.0) < 1e-6);

    const auto k3 = KernelTable::build(3, 1.0);
    for (double r = 0.01; r < 100.0; r *= 3.3)
        CHECK(k3.profile(r) == Catch::Approx(poisson3(r)).epsilon(1e-4));
    CHECK(std::abs(k3.mass() - 1.0) < 1e-6);
}

TEST_CASE("origin cell averages") {
    const auto g = KernelTable::build(1, 2.0);
    // independent oracle: 20000-panel Simpson quadrature of the gaussian
    auto brute = [](double h, double t) {
        const double c = 1.0 / std::sqrt(4.0 * M_PI * t);
        auto f = [&](double y) { return c * std::exp(-y * y / (4.0 * t)); };
        const int n = 20000;
        const double dx = h / n;
        double s = f(-0.5 * h) + f(0.5 * h);
        for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(-0.5 * h + i * dx);
        return s * dx / 3.0 / h;
    };
    for (double t : {1e-4, 0.01, 0.25, 1.0})
        CHECK(g.cell_average_origin(0.1, t) == Catch::Approx(brute(0.1, t)).epsilon(1e-10));
    // limits: tiny t traps all mass in the cell (avg -> 1/h); for t far larger
    // than the cell the average approaches the on-axis value
    CHECK(g.cell_average_origin(0.1, 1e-8) == Catch::Approx(10.0).epsilon(1e-12));
    CHECK(g.cell_average_origin(0.001, 1.0) ==
          Catch::Approx(1.0 / std::sqrt(4.0 * M_PI)).epsilon(1e-6));
    // theta = 1: nearly all mass sits inside the cell for tiny t
    const auto& k = cauchy_kernel();
    const double avg = k.cell_average_origin(0.1, 1e-6);
    const double oracle = 2.0 / M_PI * std::atan(0.05 / 1e-6) / 0.1;
    CHECK(avg == Catch::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("Bessel J0 spot values") {
    CHECK(detail::bessel_j0(1.0) == Catch::Approx(0.7651976865579666).margin(1e-12));
    CHECK(detail::bessel_j0(5.0) == Catch::Approx(-0.17759677131433830).margin(1e-12));
    CHECK(detail::bessel_j0(20.0) == Catch::Approx(0.16702466434058315).margin(1e-9));
    CHECK(detail::bessel_j0(100.0) == Catch::Approx(0.019985850304223122).margin(1e-9));
}

TEST_CASE("constructor validation") {
    CHECK_THROWS_AS(KernelTable::build(0, 1.0), ConfigError);
    CHECK_THROWS_AS(KernelTable::build(4, 1.0), ConfigError);
    CHECK_THROWS_AS(KernelTable::build(1, 0.0), ConfigError);
    CHECK_THROWS_AS(KernelTable::build(1, 2.5), ConfigError);
}
