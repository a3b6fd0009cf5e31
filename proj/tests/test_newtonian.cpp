#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "virtdyn/newtonian.hpp"

using namespace virtdyn;

namespace {

double energy_drift(const NewtonianSolution& sol, double s)
{
    const auto pt = sol.at(s);
    const auto e = energies(pt.x, pt.v, sol.gamma(), sol.x0());
    return e.kinetic + e.potential - 0.5 * sol.v0() * sol.v0();
}

} // namespace

TEST(Energies, ReferencePointAndArithmetic)
{
    const auto e0 = energies(1.0, 0.7, 1.0, 1.0);
    EXPECT_EQ(e0.potential, 0.0);
    EXPECT_DOUBLE_EQ(e0.kinetic, 0.245);
    EXPECT_DOUBLE_EQ(energies(2.0, 3.0, 1.0, 1.0).potential, -0.25);
}

TEST(TerminalVelocity, Examples)
{
    EXPECT_DOUBLE_EQ(terminal_velocity(1.0, 1.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(terminal_velocity(4.0, 1.0, 3.0), std::sqrt(13.0));
}

TEST(Solve, ApproachesTerminalVelocity)
{
    const auto sol = solve(1.0, 1.0, 0.0, 100.0);
    const double v = sol.velocity(100.0);
    EXPECT_GE(v, 0.99);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(sol.position(0.0), 1.0);
    EXPECT_EQ(sol.velocity(0.0), 0.0);
}

TEST(Solve, ConservesEnergy)
{
    for (double v0 : {0.0, 0.4, -0.5}) {
        const auto sol = solve(1.0, 1.0, v0, 100.0);
        double worst = 0.0;
        for (int i = 0; i <= 20000; ++i)
            worst = std::max(worst, std::abs(energy_drift(sol, 100.0 * i / 20000.0)));
        EXPECT_LT(worst, 10 * sol.tol()) << "v0 = " << v0;
    }
}

TEST(Solve, EarlyMotionMatchesTaylorSeries)
{
    // x'' = gamma / (2 x^2): x(s) = x0 + v0 s + g s^2/2 - g v0 s^3/(3 x0) + O(s^4),
    // g = gamma / (2 x0^2).
    const double gamma = 1.5, x0 = 2.0, v0 = 0.3, s = 1e-3;
    const auto sol = solve(gamma, x0, v0, 1.0);
    const double g = gamma / (2 * x0 * x0);
    const double series = x0 + v0 * s + 0.5 * g * s * s - g * v0 * s * s * s / (3 * x0);
    EXPECT_NEAR(sol.position(s), series, 1e-13);
}

TEST(Solve, TurnaroundAtEnergyMinimum)
{
    const auto sol = solve(1.0, 1.0, -0.5, 20.0);
    const auto st = sol.turnaround_time();
    ASSERT_TRUE(st);
    EXPECT_NEAR(sol.position(*st), 0.8, 1e-6);
    EXPECT_NEAR(sol.velocity(*st), 0.0, 1e-9);
    double x_min = 1.0;
    for (int i = 0; i <= 20000; ++i) x_min = std::min(x_min, sol.position(20.0 * i / 20000.0));
    EXPECT_NEAR(x_min, 0.8, 1e-6);
    EXPECT_FALSE(solve(1.0, 1.0, 0.2, 5.0).turnaround_time());
}

TEST(Solve, TimeReversalRecoversStart)
{
    const double s_star = 7.5;
    const auto fwd = solve(1.0, 1.0, -0.5, s_star);
    const auto end = fwd.at(s_star);
    const auto back = solve(1.0, end.x, -end.v, s_star);
    const auto start = back.at(s_star);
    EXPECT_NEAR(start.x, 1.0, 100 * fwd.tol());
    EXPECT_NEAR(-start.v, -0.5, 100 * fwd.tol());
}

TEST(Solve, OutsideRangeAndBadTolerance)
{
    const auto sol = solve(1.0, 1.0, 0.0, 2.0);
    EXPECT_THROW(sol.at(2.5), Error);
    EXPECT_THROW(sol.at(-0.1), Error);
    try {
        solve(1.0, 1.0, 0.0, 1.0, 1e-20);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    }
    try {
        solve(-1.0, 1.0, 0.0, 1.0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonPositiveParameter);
    }
}

TEST(TimeOfFlight, EmptyIntervalIsZero)
{
    EXPECT_EQ(time_of_flight(1.0, 1.0, 0.0, 1.0), 0.0);
    EXPECT_EQ(time_of_flight(1.0, 1.0, 1.0, 1.0), 0.0);
}

TEST(TimeOfFlight, MatchesSimpsonOracle)
{
    // dx / sqrt(2 - 1/x) on [1, 2] is smooth, so plain Simpson converges fast.
    const double ref = oracle::simpson([](double x) { return 1.0 / std::sqrt(2.0 - 1.0 / x); }, 1.0, 2.0,
                                       1000000);
    EXPECT_NEAR(time_of_flight(1.0, 1.0, 1.0, 2.0), ref, 1e-9);
}

TEST(TimeOfFlight, InvertsSolve)
{
    const double s = time_of_flight(1.0, 1.0, 0.0, 1.5);
    const auto sol = solve(1.0, 1.0, 0.0, s + 1.0);
    EXPECT_NEAR(sol.position(s), 1.5, 1e-8);
    const auto back = sol.time_at_position(1.5);
    ASSERT_TRUE(back);
    EXPECT_NEAR(*back, s, 1e-8);
}

TEST(TimeOfFlight, RestStartHasClosedForm)
{
    // v0 = 0, gamma = x0 = 1: v = sqrt(1 - 1/x), s(x) = sqrt(x(x-1)) + acosh(sqrt(x)).
    for (double x : {1.001, 1.3, 4.0, 50.0}) {
        const double exact = std::sqrt(x * (x - 1)) + std::acosh(std::sqrt(x));
        EXPECT_NEAR(time_of_flight(1.0, 1.0, 0.0, x), exact, 1e-10 * std::max(1.0, exact)) << x;
    }
}

TEST(TimeOfFlight, RejectsBackwardTargets)
{
    EXPECT_THROW(time_of_flight(1.0, 1.0, 0.0, 0.5), Error);
    EXPECT_THROW(time_of_flight(1.0, 1.0, -0.2, 2.0), Error);
}
