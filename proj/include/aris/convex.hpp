// SPDX-License-Identifier: Apache-2.0
//
// Small dense solvers: unit-diagonal SDP, log-barrier method for smooth convex
// programs, damped Newton root finding and bisection.

#ifndef ARIS_CONVEX_HPP
#define ARIS_CONVEX_HPP

#include "aris/types.hpp"

#include <functional>
#include <tuple>
#include <utility>
#include <vector>

namespace aris
{
    // ---- SDP: maximize tr(R X) s.t. diag(X) = 1, X >= 0 ----

    struct SdpOptions
    {
        double tol = 1e-7;
        int max_iter = 200;
        int max_dim = 256;
    };

    struct SdpResult
    {
        CMatrix x;
        Eigen::VectorXd y; // dual: Diag(y) - R >= 0
        double value = 0.0;
        double gap = 0.0;
        int iterations = 0;
    };

    // Throws ConvergenceError when max_iter is hit and SolverError on breakdown.
    SdpResult solve_sdp(const CMatrix &r, const SdpOptions &opts = {});

    // ---- barrier method ----

    // Value plus sparse gradient and Hessian. Hessian entries (i, j) with i <= j
    // stand for both symmetric positions. A non-finite value marks x outside the domain.
    struct SparseEval
    {
        double value = 0.0;
        std::vector<std::pair<int, double>> grad;
        std::vector<std::tuple<int, int, double>> hess;
    };

    using Evaluator = std::function<SparseEval(const Eigen::VectorXd &x, bool derivatives)>;

    struct ConvexProgram
    {
        int dim = 0;
        Evaluator objective;
        std::vector<Evaluator> inequalities; // f_i(x) <= 0
        Eigen::MatrixXd eq_a;                // eq_a x = eq_b, may have zero rows
        Eigen::VectorXd eq_b;
    };

    struct BarrierOptions
    {
        double tol = 1e-9;      // duality gap m / t
        double mu = 2.0;        // t multiplier per outer step (barrier weight halves)
        double t0 = 0.0;        // 0 picks m / max(|f0(x0)|, 1)
        double alpha = 0.3;     // backtracking parameters
        double beta = 0.8;
        double newton_tol = 1e-10;
        int max_newton = 200;
        int max_outer = 200;
    };

    struct ConvexResult
    {
        Eigen::VectorXd x;
        double value = 0.0;
        Eigen::VectorXd ineq_multipliers;
        Eigen::VectorXd eq_multipliers;
        double gap = 0.0;
        double kkt_residual = 0.0;
        int newton_iterations = 0;
    };

    // x0 must satisfy every inequality strictly and the equalities to ~1e-9.
    ConvexResult solve_convex_program(const ConvexProgram &program, const Eigen::VectorXd &x0, const BarrierOptions &opts = {});

    // ---- root finding ----

    struct NewtonOptions
    {
        double tol = 1e-12;
        int max_iter = 100;
        int max_halvings = 30;
    };

    using VectorFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd &)>;
    using JacobianFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd &)>;

    // Damped Newton; throws ConvergenceError if ||F|| <= tol is not reached.
    Eigen::VectorXd newton_solve(const VectorFunction &f, const JacobianFunction &jac, const Eigen::VectorXd &x0,
                                 const NewtonOptions &opts = {});

    // Requires f(lo) * f(hi) <= 0; throws SolverError otherwise.
    double bisect(const std::function<double(double)> &f, double lo, double hi, double tol, int max_iter = 200);
}

#endif
