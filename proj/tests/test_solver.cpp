#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fracheat/solver.hpp"

using namespace fracheat;

namespace {

const KernelTable& gauss1() {
    static const KernelTable k = KernelTable::build(1, 2.0, {});
    return k;
}

Nonlinearity zero_source() { return Nonlinearity::custom("0*u", "0*u"); }
Nonlinearity linear_source() { return Nonlinearity::custom("u", "1+0*u"); }

GridField constant_one(int M) {
    return discretize(8.0, M, [](double) { return 1.0; }, 1.0);
}

double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("zero source term reduces to the bare semigroup") {
    const auto u0 = discretize(8.0, 128, [](double x) { return std::exp(-x * x); });
    const auto rep = mild_solve(gauss1(), zero_source(), u0, 0.5, 0.125, 1e-12);

    CHECK(rep.verdict == SolveVerdict::Converged);
    CHECK(rep.iterations == 1); // first sweep already a fixed point
    REQUIRE(rep.residual_history.size() == 1);
    CHECK(rep.residual_history[0] == 0.0);
    CHECK(rep.T_reached == 0.5);
    CHECK(rep.first_exceed_step == -1);
    CHECK(rep.monotone_defect == 0.0);

    REQUIRE(rep.trajectory.size() == 5);
    CHECK(sup_diff(rep.trajectory[0].values, u0.values) == 0.0);
    for (int k = 1; k <= 4; ++k) {
        const auto ut = apply_semigroup(gauss1(), u0, k * 0.125);
        CHECK(sup_diff(rep.trajectory[k].values, ut.values) < 1e-13);
    }
    REQUIRE(rep.sup_history.size() == 5);
    CHECK(rep.sup_history[0] == Catch::Approx(u0.sup()).margin(1e-12));
    CHECK(rep.sup_history[4] < rep.sup_history[0]); // pure diffusion decays
}

TEST_CASE("linear source term follows the exponential integrating factor") {
    // d/dt u = Lap u + u with indicator data: u(T) = e^T S(T) u0, so the
    // discrete defect against the same discrete semigroup isolates the time
    // quadrature error, which is second order in dt.
    const auto u0 = discretize(8.0, 512, [](double x) { return std::abs(x) <= 1.0 ? 1.0 : 0.0; });
    const double T = 0.5;
    const auto oracle = apply_semigroup(gauss1(), u0, T);
    const double scale = std::exp(T);

    auto rel_err = [&](double dt) {
        const auto rep = mild_solve(gauss1(), linear_source(), u0, T, dt, 1e-12);
        REQUIRE(rep.verdict == SolveVerdict::Converged);
        CHECK(rep.monotone_defect < 1e-10);
        double num = 0.0, den = 0.0;
        const auto& uT = rep.trajectory.back().values;
        for (std::size_t i = 0; i < uT.size(); ++i) {
            num = std::max(num, std::abs(uT[i] - scale * oracle.values[i]));
            den = std::max(den, scale * oracle.values[i]);
        }
        return num / den;
    };

    const double e32 = rel_err(1.0 / 32.0);
    const double e64 = rel_err(1.0 / 64.0);
    CHECK(e64 < 1e-4);
    CHECK(e64 < 0.35 * e32); // second-order decay in dt
}

TEST_CASE("constant data reproduces the scalar integral equation") {
    const auto u0 = constant_one(64);
    const auto nl = Nonlinearity::power(2.0); // u' = u^2, u(0) = 1: u = 1/(1-t)

    SECTION("short horizon converges onto the exact solution") {
        const auto rep = mild_solve(gauss1(), nl, u0, 0.5, 0.01, 1e-10);
        REQUIRE(rep.verdict == SolveVerdict::Converged);
        CHECK(rep.monotone_defect < 1e-10);
        REQUIRE(rep.trajectory.size() == 51);
        for (int k = 0; k <= 50; ++k) {
            const auto& vals = rep.trajectory[k].values;
            double lo = vals[0], hi = vals[0];
            for (double v : vals) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            CHECK(hi - lo <= 1e-10); // spatial homogeneity is preserved
            const double exact = 1.0 / (1.0 - 0.01 * k);
            CHECK(std::abs(vals[0] - exact) <= 1e-3 * exact);
        }
        // sup history of a growing solution is nondecreasing
        for (std::size_t k = 1; k < rep.sup_history.size(); ++k)
            CHECK(rep.sup_history[k] >= rep.sup_history[k - 1] - 1e-12);
    }

    SECTION("horizon past the singularity produces stable blow-up evidence") {
        const auto rep = mild_solve(gauss1(), nl, u0, 1.2, 0.01, 1e-10);
        CHECK(rep.verdict == SolveVerdict::BlowUpEvidence);
        CHECK(rep.refinement_stable);
        CHECK(rep.first_exceed_step > 0);
        CHECK(rep.T_reached == Catch::Approx(rep.first_exceed_step * 0.01));
        CHECK(rep.T_reached > 0.9);  // crossing sits just below the true time 1
        CHECK(rep.T_reached <= 1.02);
        CHECK_FALSE(rep.nan_seen);
    }
}

TEST_CASE("extrapolated crossing times recover the tail integral of the source") {
    // For constant data c the blow-up time of the integral equation is
    // int_c^inf ds/f(s); Richardson extrapolation of the cap-crossing times
    // under dt halving must land within 2% of it.
    const auto u0 = constant_one(64);

    SECTION("quadratic source, time 1") {
        const auto est = estimate_blowup_time(gauss1(), Nonlinearity::power(2.0), u0, 1.2,
                                              {0.02, 0.01});
        CHECK(est.estimate > 0.98);
        CHECK(est.estimate < 1.02);
        CHECK(est.lo <= 1.0);
        CHECK(est.hi >= 1.0);
        REQUIRE(est.crossings.size() == 2);
        CHECK(est.crossings[0] <= est.crossings[1]); // crossing grows as dt shrinks
    }

    SECTION("cubic source, time 1/2") {
        const auto est = estimate_blowup_time(gauss1(), Nonlinearity::power(3.0), u0, 0.65,
                                              {0.01, 0.005});
        CHECK(est.estimate > 0.49);
        CHECK(est.estimate < 0.51);
        CHECK(est.lo <= 0.5);
        CHECK(est.hi >= 0.5);
    }

    SECTION("exponential source, time 1/e") {
        const double truth = std::exp(-1.0);
        const auto est = estimate_blowup_time(gauss1(), Nonlinearity::exp_family(1, 1.0),
                                              u0, 0.44, {0.004, 0.002});
        CHECK(est.estimate > 0.98 * truth);
        CHECK(est.estimate < 1.02 * truth);
        CHECK(est.lo <= truth);
        CHECK(est.hi >= truth);
    }
}

TEST_CASE("steep sources saturate instead of overflowing") {
    // exp(u) at the cap would overflow to inf without argument/result
    // saturation; the crossing must still be detected cleanly.
    const auto u0 = constant_one(64);
    const auto rep =
        mild_solve(gauss1(), Nonlinearity::exp_family(1, 1.0), u0, 0.44, 0.004, 1e-10);
    CHECK(rep.verdict == SolveVerdict::BlowUpEvidence);
    CHECK(rep.refinement_stable);
    CHECK_FALSE(rep.nan_seen);
    CHECK(rep.T_reached > 0.33);
    CHECK(rep.T_reached < 0.40);
}

TEST_CASE("comparison data stays ordered") {
    const auto uA = discretize(8.0, 128, [](double x) { return 0.8 * std::exp(-x * x); });
    const auto uB =
        discretize(8.0, 128, [](double x) { return 0.8 * std::exp(-x * x) + 0.1; }, 0.1);
    const auto nl = Nonlinearity::power(2.0);

    const auto repA = mild_solve(gauss1(), nl, uA, 0.3, 0.05, 1e-11);
    const auto repB = mild_solve(gauss1(), nl, uB, 0.3, 0.05, 1e-11);
    REQUIRE(repA.verdict == SolveVerdict::Converged);
    REQUIRE(repB.verdict == SolveVerdict::Converged);

    CHECK(check_order_preservation(repA, repB));
    CHECK(check_order_preservation(repA, repA)); // equality is allowed
    CHECK_FALSE(check_order_preservation(repB, repA));

    SECTION("geometry and bookkeeping mismatches are rejected") {
        const auto uC = discretize(8.0, 64, [](double x) { return 0.5 * std::exp(-x * x); });
        const auto repC = mild_solve(gauss1(), nl, uC, 0.3, 0.05, 1e-11);
        CHECK_THROWS_AS(check_order_preservation(repA, repC), ConfigError);

        MildSolveOptions opt;
        opt.store_trajectory = false;
        const auto repD = mild_solve(gauss1(), nl, uA, 0.3, 0.05, 1e-11, 1e8, opt);
        CHECK_THROWS_AS(check_order_preservation(repA, repD), ConfigError);
    }
}

TEST_CASE("refined-grid confirmation uses the supplied discretizer") {
    const auto u0 = constant_one(64);
    const auto nl = Nonlinearity::power(2.0);

    SECTION("consistent re-discretization confirms the verdict") {
        MildSolveOptions opt;
        opt.rediscretize = [](int factor) { return constant_one(64 * factor); };
        const auto rep = mild_solve(gauss1(), nl, u0, 1.2, 0.01, 1e-10, 1e8, opt);
        CHECK(rep.verdict == SolveVerdict::BlowUpEvidence);
        CHECK(rep.refinement_stable);
    }

    SECTION("a refinement that does not blow up demotes the verdict") {
        MildSolveOptions opt;
        opt.rediscretize = [](int factor) {
            return discretize(8.0, 64 * factor, [](double) { return 0.0; });
        };
        const auto rep = mild_solve(gauss1(), nl, u0, 1.2, 0.01, 1e-10, 1e8, opt);
        CHECK(rep.verdict == SolveVerdict::Inconclusive);
        CHECK_FALSE(rep.refinement_stable);
        CHECK(rep.first_exceed_step > 0); // the base run did cross
    }
}

TEST_CASE("iteration budget exhaustion is inconclusive") {
    const auto u0 = discretize(8.0, 128, [](double x) { return std::exp(-x * x); });
    MildSolveOptions opt;
    opt.max_iter = 3;
    const auto rep = mild_solve(gauss1(), linear_source(), u0, 0.5, 1.0 / 32.0, 1e-15, 1e8, opt);
    CHECK(rep.verdict == SolveVerdict::Inconclusive);
    CHECK(rep.T_reached == 0.5);
    CHECK(rep.iterations == 3);
    CHECK(rep.first_exceed_step == -1);
}

TEST_CASE("solver validation rejects inconsistent requests") {
    const auto u0 = discretize(8.0, 64, [](double x) { return std::exp(-x * x); });
    const auto nl = Nonlinearity::power(2.0);

    CHECK_THROWS_AS(mild_solve(gauss1(), nl, u0, 1.0, 0.3, 1e-8), ConfigError);   // dt ∤ T
    CHECK_THROWS_AS(mild_solve(gauss1(), nl, u0, -1.0, 0.1, 1e-8), ConfigError);  // T <= 0
    CHECK_THROWS_AS(mild_solve(gauss1(), nl, u0, 1.0, -0.1, 1e-8), ConfigError);  // dt <= 0
    CHECK_THROWS_AS(mild_solve(gauss1(), nl, u0, 1.0, 0.1, 0.0), ConfigError);    // tol <= 0
    CHECK_THROWS_AS(mild_solve(gauss1(), nl, u0, 1.0, 0.1, 1e-8, 0.5), ConfigError); // cap <= sup
    CHECK_THROWS_AS(mild_solve(gauss1(), nl, u0, 1.0, 1e-6, 1e-8), ConfigError);  // too many steps

    // a box too small for the horizon trips the leak guard
    CHECK_THROWS_AS(mild_solve(gauss1(), nl, u0, 6.0, 1.0, 1e-8), WindowTooSmallError);

    CHECK_THROWS_AS(estimate_blowup_time(gauss1(), nl, u0, 1.0, {0.01}), ConfigError);

    // a run that converges cannot seed a blow-up time estimate
    const auto c1 = constant_one(64);
    CHECK_THROWS_AS(estimate_blowup_time(gauss1(), nl, c1, 0.5, {0.02, 0.01}),
                    NotBlowingUpError);
}
