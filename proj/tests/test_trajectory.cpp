// SPDX-License-Identifier: Apache-2.0

#include "aris/scenario.hpp"
#include "aris/trajectory.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace aris;

namespace
{
    void expect_trajectory_valid(const TrajectoryProblem &p, const std::vector<Vec3> &q)
    {
        ASSERT_EQ(static_cast<int>(q.size()), p.slots);
        EXPECT_EQ(q.front(), p.start);
        EXPECT_EQ(q.back(), p.end);
        for (int l = 0; l + 1 < p.slots; ++l)
            EXPECT_LE((q[l + 1] - q[l]).norm(), p.d_max + 1e-6);
    }

    // Desk-like geometry: users inside 100 m, corridor north of the cell
    TrajectoryProblem desk_problem(std::uint64_t seed)
    {
        TrajectoryProblem p;
        Rng rng(seed);
        p.users = sample_user_positions(rng, 100.0, 4);
        p.bs = Vec3(0, 0, 25);
        p.start = Vec3(-300, 250, 100);
        p.end = Vec3(300, 250, 100);
        p.slots = 6;
        p.d_max = 375.0;
        p.k1 = p.k2 = 2.2;
        std::uniform_real_distribution<double> u(0.5, 2.0);
        for (int l = 0; l < p.slots; ++l)
            for (int k = 0; k < 4; ++k)
            {
                TrajectoryTerm t;
                t.slot = l;
                t.user = k;
                t.a = 1e-3 * u(rng);
                t.b = 1e-9 * (u(rng) - 1.0);
                t.g0 = 1e-15 * u(rng);
                t.c = u(rng);
                p.terms.push_back(t);
            }
        return p;
    }
}

TEST(QuadTransformX, Examples)
{
    EXPECT_DOUBLE_EQ(quad_transform_x(2.0, 4.0), 0.5);
    EXPECT_EQ(quad_transform_x(0.0, 4.0), 0.0);
    EXPECT_THROW(quad_transform_x(1.0, 0.0), InfeasibleError);
    const double c = 1.7, g = 0.3, x = quad_transform_x(c, g);
    EXPECT_NEAR(2.0 * x * c - x * x * g, c * c / g, 1e-12);
}

TEST(Linearize, ExpansionPointAndSlopes)
{
    const TangentPlane t = linearize_power_term(1.0, 1.0, 1.0, 2.0, 2.0);
    EXPECT_DOUBLE_EQ(t.at(1.0, 1.0, 1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(t.at(2.0, 1.0, 1.0, 1.0), -1.0);
    EXPECT_LE(t.at(2.0, 1.0, 1.0, 1.0), 1.0 / 4.0);

    const double a = 3.0, u0 = 2.0, v0 = 5.0, k1 = 2.2, k2 = 1.7;
    const TangentPlane s = linearize_power_term(a, u0, v0, k1, k2);
    EXPECT_NEAR(s.value, a / (std::pow(u0, k1) * std::pow(v0, k2)), 1e-15);
    EXPECT_NEAR(s.du, -a * k1 / (std::pow(u0, k1 + 1) * std::pow(v0, k2)), 1e-15);
    EXPECT_NEAR(s.dv, -a * k2 / (std::pow(u0, k1) * std::pow(v0, k2 + 1)), 1e-15);
}

TEST(Linearize, TangentUnderestimates)
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(1.0, 500.0), c(0.0, 10.0);
    for (int i = 0; i < 1000; ++i)
    {
        const double a = c(rng), b = c(rng), u0 = d(rng), v0 = d(rng), u = d(rng), v = d(rng);
        for (auto [coeff, e] : {std::pair{a, 2.2}, std::pair{b, 1.1}})
        {
            const TangentPlane t = linearize_power_term(coeff, u0, v0, e, e);
            const double truth = coeff * std::pow(u, -e) * std::pow(v, -e);
            EXPECT_LE(t.at(u, v, u0, v0), truth * (1.0 + 1e-12) + 1e-300);
        }
    }
}

TEST(StraightLine, EvenSpacingAndExactEnds)
{
    const Vec3 a(-80, 55, 100), b(100, 20, 100);
    const auto q = straight_line(a, b, 5);
    EXPECT_EQ(q.front(), a);
    EXPECT_EQ(q.back(), b);
    for (int l = 0; l + 1 < 5; ++l)
        EXPECT_NEAR((q[l + 1] - q[l]).norm(), (b - a).norm() / 4.0, 1e-12);
}

TEST(ScaStep, PinnedEndpointsOnlyTightenSlacks)
{
    TrajectoryProblem p = desk_problem(2);
    p.slots = 2;
    p.d_max = 1000.0;
    std::erase_if(p.terms, [](const TrajectoryTerm &t) { return t.slot >= 2; });
    const auto q = straight_line(p.start, p.end, 2);
    ScaState s = initial_sca_state(p, q, 0.05);
    std::vector<double> x;
    for (const auto &t : p.terms)
        x.push_back(quad_transform_x(t.c, term_gain(t, s.u[t.slot][t.user], s.v[t.slot], p.k1, p.k2)));
    const ScaStepResult r = sca_step(p, s, x);
    ASSERT_TRUE(r.solved);
    EXPECT_EQ(r.state.q, q);
    for (int l = 0; l < 2; ++l)
    {
        for (int k = 0; k < 4; ++k)
        {
            const double d = (q[l] - p.users[k]).norm();
            EXPECT_GE(r.state.u[l][k], d - 1e-6);
            EXPECT_LT(r.state.u[l][k], s.u[l][k]);
            // the surrogate bound d^2 + u0^2 - 2 u0 u <= 0 is tight at the optimum
            const double u0 = s.u[l][k];
            EXPECT_NEAR(r.state.u[l][k], (d * d + u0 * u0) / (2.0 * u0), 1e-4 * d);
        }
        const double dv = (q[l] - p.bs).norm(), v0 = s.v[l];
        EXPECT_NEAR(r.state.v[l], (dv * dv + v0 * v0) / (2.0 * v0), 1e-4 * dv);
    }
    EXPECT_LE(r.after, r.before);
}

TEST(ScaStep, FeasibleAndDescending)
{
    const TrajectoryProblem p = desk_problem(3);
    const ScaState s = initial_sca_state(p, straight_line(p.start, p.end, p.slots));
    std::vector<double> x;
    for (const auto &t : p.terms)
        x.push_back(quad_transform_x(t.c, term_gain(t, s.u[t.slot][t.user], s.v[t.slot], p.k1, p.k2)));
    const ScaStepResult r = sca_step(p, s, x);
    ASSERT_TRUE(r.solved);
    EXPECT_LE(constraint_violation(p, r.state), 1e-6);
    EXPECT_LE(r.after, r.before);
    EXPECT_LE(slack_objective(p, r.state, x), r.after + 1e-12 * std::abs(r.after));
}

TEST(ScaStep, SurrogateConstraintImpliesTrueConstraint)
{
    // d^2 + u0^2 - 2 u0 u <= 0 implies d <= u, since (u - u0)^2 >= 0
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> r(0.0, 300.0);
    int checked = 0;
    while (checked < 1000)
    {
        const double d = r(rng), u0 = r(rng) + 1.0, u = r(rng);
        if (d * d + u0 * u0 - 2.0 * u0 * u > 0.0)
            continue;
        ++checked;
        EXPECT_LE(d, u * (1.0 + 1e-12));
    }
}

TEST(OptimizeTrajectory, SingleMidpointMatchesGridSearch)
{
    TrajectoryProblem p;
    p.users = {Vec3(0, 0, 0)};
    p.bs = Vec3(150, 0, 25);
    p.start = Vec3(-200, 200, 100);
    p.end = Vec3(200, 200, 100);
    p.slots = 3;
    p.d_max = 300.0;
    p.k1 = p.k2 = 2.0;
    p.terms.push_back({1, 0, 1.0, 0.0, 0.0, 1.0});
    TrajectoryOptions opts;
    opts.max_rounds = 30;
    opts.max_sca = 50;
    opts.eps5 = 1e-9;
    opts.sca_tol = 1e-10;
    const TrajectoryResult r = optimize_trajectory(p, straight_line(p.start, p.end, 3), opts);
    expect_trajectory_valid(p, r.q);

    double best = std::numeric_limits<double>::infinity();
    Vec3 arg;
    for (double xx = -200.0; xx <= 200.0; xx += 0.5)
        for (double yy = -100.0; yy <= 500.0; yy += 0.5)
        {
            const Vec3 q(xx, yy, 100.0);
            if ((q - p.start).norm() > p.d_max || (q - p.end).norm() > p.d_max)
                continue;
            const double v = (q - p.users[0]).squaredNorm() * (q - p.bs).squaredNorm();
            if (v < best)
                best = v, arg = q;
        }
    EXPECT_LE((r.q[1] - arg).norm(), 2.0) << r.q[1].transpose() << " vs " << arg.transpose();
}

TEST(OptimizeTrajectory, HugeToleranceStopsAfterOneRound)
{
    const TrajectoryProblem p = desk_problem(5);
    TrajectoryOptions opts;
    opts.eps5 = 1e300;
    const auto q0 = straight_line(p.start, p.end, p.slots);
    const TrajectoryResult r = optimize_trajectory(p, q0, opts);
    EXPECT_EQ(r.rounds, 1);
    EXPECT_LE(r.objective_after, r.objective_before);
    expect_trajectory_valid(p, r.q);
}

TEST(OptimizeTrajectory, BeatsDirectPathOnDeskGeometry)
{
    int better = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        const TrajectoryProblem p = desk_problem(100 + seed);
        const auto q0 = straight_line(p.start, p.end, p.slots);
        const TrajectoryResult r = optimize_trajectory(p, q0);
        expect_trajectory_valid(p, r.q);
        EXPECT_TRUE(r.sca_monotone);
        EXPECT_LE(r.objective_after, r.objective_before);
        EXPECT_NEAR(r.objective_after, trajectory_objective(p, r.q), 1e-12 * r.objective_after);
        better += r.objective_after < r.objective_before;
    }
    EXPECT_GE(better, 18);
}

TEST(OptimizeTrajectory, RejectsWrongLength)
{
    const TrajectoryProblem p = desk_problem(6);
    EXPECT_THROW(optimize_trajectory(p, straight_line(p.start, p.end, 3)), std::invalid_argument);
}
