// SPDX-License-Identifier: Apache-2.0

#include "aris/channel.hpp"
#include "aris/convex.hpp"
#include "aris/exposure.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace aris;

namespace
{
    CMatrix random_hermitian(Rng &rng, int n)
    {
        const CMatrix a = standard_complex_gaussian(rng, n, n);
        return 0.5 * (a + a.adjoint());
    }

    // Best value of v^H R v over v = (theta, 1) with theta on a `levels`-point phase grid
    double enumerate_phases(const CMatrix &r, int levels)
    {
        const int n = static_cast<int>(r.rows()) - 1;
        std::vector<int> idx(n, 0);
        CVector v(n + 1);
        v(n) = 1.0;
        double best = -std::numeric_limits<double>::infinity();
        while (true)
        {
            for (int i = 0; i < n; ++i)
                v(i) = std::polar(1.0, 2.0 * pi * idx[i] / levels);
            best = std::max(best, (v.adjoint() * r * v)(0, 0).real());
            int k = 0;
            while (k < n && ++idx[k] == levels)
                idx[k++] = 0;
            if (k == n)
                break;
        }
        return best;
    }

    void expect_sdp_feasible(const SdpResult &res, double tol)
    {
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(res.x);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -tol);
        for (int i = 0; i < res.x.rows(); ++i)
            EXPECT_NEAR(res.x(i, i).real(), 1.0, tol);
        EXPECT_LE(res.gap, tol * (1.0 + std::abs(res.value)));
    }

    Evaluator quadratic(Eigen::MatrixXd q, Eigen::VectorXd l, double c)
    {
        return [q, l, c](const Eigen::VectorXd &x, bool derivatives)
        {
            SparseEval e;
            e.value = 0.5 * x.dot(q * x) + l.dot(x) + c;
            if (derivatives)
            {
                const Eigen::VectorXd g = q * x + l;
                for (int i = 0; i < x.size(); ++i)
                {
                    e.grad.emplace_back(i, g(i));
                    for (int j = i; j < x.size(); ++j)
                        e.hess.emplace_back(i, j, q(i, j));
                }
            }
            return e;
        };
    }

    Evaluator affine(Eigen::VectorXd l, double c) { return quadratic(Eigen::MatrixXd::Zero(l.size(), l.size()), l, c); }
}

TEST(Sdp, TwoByTwo)
{
    CMatrix r(2, 2);
    r << 0.0, 1.0, 1.0, 0.0;
    const SdpResult res = solve_sdp(r);
    EXPECT_NEAR(res.value, 2.0, 1e-6);
    EXPECT_NEAR((res.x - CMatrix::Ones(2, 2)).norm(), 0.0, 1e-3);
    expect_sdp_feasible(res, 1e-7);
}

TEST(Sdp, DiagonalObjective)
{
    CMatrix r = CMatrix::Zero(4, 4);
    r.diagonal() << 1.0, -2.0, 0.5, 3.0;
    const SdpResult res = solve_sdp(r);
    EXPECT_NEAR(res.value, 2.5, 1e-6);
    expect_sdp_feasible(res, 1e-7);
}

TEST(Sdp, UpperBoundsPhaseEnumeration)
{
    Rng rng(11);
    for (int t = 0; t < 5; ++t)
    {
        const CMatrix r = random_hermitian(rng, 5);
        const SdpResult res = solve_sdp(r);
        expect_sdp_feasible(res, 1e-7);
        EXPECT_GE(res.value + 1e-7 * (1.0 + std::abs(res.value)), enumerate_phases(r, 16));
        EXPECT_NEAR((r * res.x).trace().real(), res.value, 1e-6 * (1.0 + std::abs(res.value)));
    }
}

TEST(Sdp, RejectsBadInput)
{
    CMatrix r(2, 2);
    r << 0.0, 1.0, 2.0, 0.0;
    EXPECT_THROW(solve_sdp(r), std::invalid_argument);
    EXPECT_THROW(solve_sdp(CMatrix(0, 0)), std::invalid_argument);
    SdpOptions small;
    small.max_dim = 3;
    EXPECT_THROW(solve_sdp(CMatrix::Identity(4, 4), small), std::invalid_argument);
}

TEST(Barrier, ProjectionOntoBall)
{
    const Eigen::Vector2d c(3.0, -4.0);
    ConvexProgram prog;
    prog.dim = 2;
    prog.objective = quadratic(2.0 * Eigen::MatrixXd::Identity(2, 2), -2.0 * c, c.squaredNorm());
    prog.inequalities.push_back(quadratic(2.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d::Zero(), -1.0));
    const ConvexResult res = solve_convex_program(prog, Eigen::Vector2d::Zero());
    EXPECT_NEAR((res.x - c / c.norm()).norm(), 0.0, 1e-6);
    // relative to |grad f0| = 8 at the optimum
    EXPECT_LE(res.kkt_residual, 1e-6 * 8.0);
}

TEST(Barrier, LinearOverBoxHitsVertex)
{
    ConvexProgram prog;
    prog.dim = 3;
    prog.objective = affine(Eigen::Vector3d(1.0, -2.0, 0.5), 0.0);
    for (int i = 0; i < 3; ++i)
    {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(i) = 1.0;
        prog.inequalities.push_back(affine(e, -1.0)); // x_i <= 1
        prog.inequalities.push_back(affine(-e, -1.0)); // x_i >= -1
    }
    const ConvexResult res = solve_convex_program(prog, Eigen::Vector3d::Zero());
    EXPECT_NEAR((res.x - Eigen::Vector3d(-1.0, 1.0, -1.0)).norm(), 0.0, 1e-6);
    EXPECT_NEAR(res.value, -3.5, 1e-8);
}

TEST(Barrier, EqualityConstraint)
{
    // min |x|^2 s.t. x1 + x2 + x3 = 3, x >= -5
    ConvexProgram prog;
    prog.dim = 3;
    prog.objective = quadratic(2.0 * Eigen::MatrixXd::Identity(3, 3), Eigen::Vector3d::Zero(), 0.0);
    for (int i = 0; i < 3; ++i)
    {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(i) = -1.0;
        prog.inequalities.push_back(affine(e, -5.0));
    }
    prog.eq_a = Eigen::RowVector3d(1.0, 1.0, 1.0);
    prog.eq_b = Eigen::VectorXd::Constant(1, 3.0);
    const ConvexResult res = solve_convex_program(prog, Eigen::Vector3d(3.0, 0.0, 0.0));
    EXPECT_NEAR((res.x - Eigen::Vector3d::Ones()).norm(), 0.0, 1e-6);
}

TEST(Barrier, RandomQcqpMatchesSampling)
{
    Rng rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 3; ++t)
    {
        Eigen::Matrix2d a;
        a << u(rng), u(rng), u(rng), u(rng);
        const Eigen::Matrix2d q = a.transpose() * a + 0.2 * Eigen::Matrix2d::Identity();
        const Eigen::Vector2d l(u(rng), u(rng)), c(1.5 * u(rng), 1.5 * u(rng));
        // objective 0.5 (x-c)^T q (x-c) + l^T x, feasible set: unit disk and half-plane
        ConvexProgram prog;
        prog.dim = 2;
        prog.objective = quadratic(q, l - q * c, 0.5 * c.dot(q * c));
        prog.inequalities.push_back(quadratic(2.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::Vector2d::Zero(), -1.0));
        const Eigen::Vector2d n(u(rng), u(rng));
        prog.inequalities.push_back(affine(n, -0.3));
        const ConvexResult res = solve_convex_program(prog, Eigen::Vector2d::Zero());

        double best = std::numeric_limits<double>::infinity();
        std::uniform_real_distribution<double> box(-1.0, 1.0);
        for (int s = 0; s < 1000000;)
        {
            const Eigen::Vector2d x(box(rng), box(rng));
            if (x.squaredNorm() > 1.0 || n.dot(x) > 0.3)
                continue;
            ++s;
            best = std::min(best, 0.5 * (x - c).dot(q * (x - c)) + l.dot(x));
        }
        EXPECT_LE(res.value, best + 1e-9);
        EXPECT_NEAR(res.value, best, 1e-3);
        // complementary slackness
        for (int i = 0; i < 2; ++i)
            EXPECT_LE(std::abs(res.ineq_multipliers(i) * prog.inequalities[i](res.x, false).value), 10.0 * 1e-9);
    }
}

TEST(Barrier, InfeasibleStart)
{
    ConvexProgram prog;
    prog.dim = 1;
    prog.objective = affine(Eigen::VectorXd::Ones(1), 0.0);
    prog.inequalities.push_back(affine(Eigen::VectorXd::Ones(1), -1.0));
    EXPECT_THROW(solve_convex_program(prog, Eigen::VectorXd::Constant(1, 2.0)), SolverError);
}

TEST(Newton, ScalarRoots)
{
    auto f = [](const Eigen::VectorXd &x) { return Eigen::VectorXd::Constant(1, x(0) * x(0) - 4.0); };
    auto j = [](const Eigen::VectorXd &x) { return Eigen::MatrixXd::Constant(1, 1, 2.0 * x(0)); };
    EXPECT_NEAR(newton_solve(f, j, Eigen::VectorXd::Constant(1, 3.0))(0), 2.0, 1e-12);

    auto id = [](const Eigen::VectorXd &x) { return x; };
    auto one = [](const Eigen::VectorXd &) { return Eigen::MatrixXd::Identity(1, 1); };
    EXPECT_NEAR(newton_solve(id, one, Eigen::VectorXd::Constant(1, 5.0))(0), 0.0, 1e-12);
}

TEST(Newton, PowerKktSystemMatchesNestedBisection)
{
    // Two REs, both constraints active: rate equality and sum-power cap.
    const double w = 1.0, ln2 = std::log(2.0);
    const double s[2] = {1.0, 2.5}, inv[2] = {0.2, 0.5}; // SAR and noise / gain
    auto power = [&](double mu, double lambda, int n) { return w * mu / (ln2 * (s[n] + lambda)) - inv[n]; };
    auto rate = [&](double mu, double lambda)
    {
        double r = 0.0;
        for (int n = 0; n < 2; ++n)
            r += w * std::log2(1.0 + std::max(power(mu, lambda, n), 0.0) / inv[n]);
        return r;
    };
    const double target = 3.0, p_max = 1.2; // the uncapped split needs 1.28

    auto mu_for = [&](double lambda)
    { return bisect([&](double mu) { return rate(mu, lambda) - target; }, 1e-6, 1e3, 1e-15); };
    auto total = [&](double lambda)
    {
        const double mu = mu_for(lambda);
        return power(mu, lambda, 0) + power(mu, lambda, 1) - p_max;
    };
    const double lambda_ref = bisect(total, 0.0, 50.0, 1e-14);
    const double mu_ref = mu_for(lambda_ref);
    ASSERT_GT(power(mu_ref, lambda_ref, 1), 0.0);

    auto f = [&](const Eigen::VectorXd &x)
    {
        Eigen::VectorXd out(2);
        out << rate(x(0), x(1)) - target, power(x(0), x(1), 0) + power(x(0), x(1), 1) - p_max;
        return out;
    };
    auto jac = [&](const Eigen::VectorXd &x)
    {
        const double h = 1e-7;
        Eigen::MatrixXd j(2, 2);
        for (int c = 0; c < 2; ++c)
        {
            Eigen::VectorXd xp = x, xm = x;
            xp(c) += h;
            xm(c) -= h;
            j.col(c) = (f(xp) - f(xm)) / (2.0 * h);
        }
        return j;
    };
    const Eigen::VectorXd root = newton_solve(f, jac, Eigen::Vector2d(mu_ref * 1.2, lambda_ref * 0.8));
    EXPECT_NEAR(root(0), mu_ref, 1e-8 * mu_ref);
    EXPECT_NEAR(root(1), lambda_ref, 1e-8 * std::max(1.0, lambda_ref));
}

TEST(Newton, DivergenceIsReported)
{
    // x^2 + 1 has no real root
    auto f = [](const Eigen::VectorXd &x) { return Eigen::VectorXd::Constant(1, x(0) * x(0) + 1.0); };
    auto j = [](const Eigen::VectorXd &x) { return Eigen::MatrixXd::Constant(1, 1, 2.0 * x(0)); };
    EXPECT_THROW(newton_solve(f, j, Eigen::VectorXd::Constant(1, 1.0)), ConvergenceError);
}

TEST(Bisect, Examples)
{
    EXPECT_NEAR(bisect([](double x) { return x - 1.0; }, 0.0, 2.0, 1e-12), 1.0, 1e-12);
    EXPECT_THROW(bisect([](double) { return 1.0; }, 0.0, 2.0, 1e-12), SolverError);
}

TEST(Bisect, RateBalanceMatchesClosedForm)
{
    const double w = 240e3, noise = 9.55e-16, gain = 3.1e-12, target = 2.7e6;
    const double p = bisect([&](double x) { return achievable_rate(1.0, x, gain, w, noise) - target; }, 0.0, 1.0, 1e-18);
    const double closed = min_power_for_rate(target, gain, noise, w);
    EXPECT_NEAR(p, closed, 1e-10 * closed);
}

TEST(Bisect, AgreesWithNewton)
{
    for (double c : {2.0, 5.0, 20.0, 50.0})
    {
        auto g = [c](double x) { return std::exp(x) - c * (1.0 + 0.1 * x); };
        const double b = bisect(g, 0.0, 6.0, 1e-14);
        auto f = [&](const Eigen::VectorXd &x) { return Eigen::VectorXd::Constant(1, g(x(0))); };
        auto j = [c](const Eigen::VectorXd &x) { return Eigen::MatrixXd::Constant(1, 1, std::exp(x(0)) - 0.1 * c); };
        EXPECT_NEAR(newton_solve(f, j, Eigen::VectorXd::Constant(1, b + 0.3))(0), b, 1e-8);
    }
}
