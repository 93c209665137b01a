// SPDX-License-Identifier: Apache-2.0
//
// ARIS trajectory design by successive convex approximation over the slot
// positions and distance slacks.

#ifndef ARIS_TRAJECTORY_HPP
#define ARIS_TRAJECTORY_HPP

#include "aris/convex.hpp"
#include "aris/types.hpp"

#include <vector>

namespace aris
{
    // One active (slot, user, RE) with gain
    //   gamma = a / (u^k1 v^k2) + b / sqrt(u^k1 v^k2) + g0,
    // u = user-ARIS distance, v = ARIS-BS distance, and exposure weight c^2 / gamma.
    struct TrajectoryTerm
    {
        int slot = 0;
        int user = 0;
        double a = 0.0;
        double b = 0.0;
        double g0 = 0.0;
        double c = 0.0;
    };

    struct TrajectoryProblem
    {
        std::vector<Vec3> users;
        Vec3 bs{0.0, 0.0, 0.0};
        Vec3 start{0.0, 0.0, 0.0};
        Vec3 end{0.0, 0.0, 0.0};
        int slots = 2;
        double d_max = 0.0;
        double k1 = 2.0;
        double k2 = 2.0;
        std::vector<TrajectoryTerm> terms;
    };

    struct TrajectoryOptions
    {
        double eps5 = 1e-4;   // relative change of the x vector
        int max_rounds = 10;
        int max_sca = 20;
        double sca_tol = 1e-5; // relative decrease that ends the SCA loop
        BarrierOptions barrier{1e-7, 10.0};
    };

    // Trajectory together with distance slacks: u[slot][user] >= d_uR, v[slot] >= d_RB.
    struct ScaState
    {
        std::vector<Vec3> q;
        std::vector<std::vector<double>> u;
        std::vector<double> v;
    };

    struct TangentPlane
    {
        double value = 0.0; // at the expansion point
        double du = 0.0;
        double dv = 0.0;

        double at(double u, double v, double u0, double v0) const { return value + du * (u - u0) + dv * (v - v0); }
    };

    struct ScaStepResult
    {
        ScaState state;
        double before = 0.0; // slack objective at the input
        double after = 0.0;  // surrogate at the output (upper-bounds the slack objective there)
        bool solved = false;
    };

    struct TrajectoryResult
    {
        std::vector<Vec3> q;
        double objective_before = 0.0;
        double objective_after = 0.0;
        int rounds = 0;
        int sca_iterations = 0;
        int solver_failures = 0;
        std::vector<double> slack_trace; // slack objective after each SCA iteration
        bool sca_monotone = true;
    };

    // c / gain; throws InfeasibleError for gain <= 0.
    double quad_transform_x(double c, double gain);

    // Tangent plane of coeff / (u^e1 v^e2) at (u0, v0)
    TangentPlane linearize_power_term(double coeff, double u0, double v0, double e1, double e2);

    std::vector<Vec3> straight_line(const Vec3 &start, const Vec3 &end, int slots);

    double term_gain(const TrajectoryTerm &t, double u, double v, double k1, double k2);

    // Sum of c^2 / gain at the true distances of q
    double trajectory_objective(const TrajectoryProblem &p, const std::vector<Vec3> &q);

    // Slacks at the true distances times (1 + margin)
    ScaState initial_sca_state(const TrajectoryProblem &p, const std::vector<Vec3> &q, double margin = 1e-6);

    // sum over terms of 2 x c - x^2 gain(u, v) with the slacks in place of distances
    double slack_objective(const TrajectoryProblem &p, const ScaState &s, const std::vector<double> &x);

    // Largest violation of the true constraints: slack bounds, step length, pinned endpoints.
    double constraint_violation(const TrajectoryProblem &p, const ScaState &s);

    // One convexified subproblem around `s` for fixed x. On solver failure the input is returned.
    ScaStepResult sca_step(const TrajectoryProblem &p, const ScaState &s, const std::vector<double> &x,
                           const TrajectoryOptions &opts = {});

    // Alternates x = c / gain and SCA loops starting from q0; returns the best trajectory seen.
    TrajectoryResult optimize_trajectory(const TrajectoryProblem &p, const std::vector<Vec3> &q0,
                                         const TrajectoryOptions &opts = {});
}

#endif
