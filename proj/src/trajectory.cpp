// SPDX-License-Identifier: Apache-2.0

#include "aris/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace aris
{
    namespace
    {
        constexpr double inf = std::numeric_limits<double>::infinity();

        double dist(const Vec3 &a, const Vec3 &b) { return (a - b).norm(); }
    }

    double quad_transform_x(double c, double gain)
    {
        if (!(gain > 0.0))
            throw InfeasibleError("quadratic transform: zero link gain");
        return c / gain;
    }

    TangentPlane linearize_power_term(double coeff, double u0, double v0, double e1, double e2)
    {
        TangentPlane t;
        t.value = coeff * std::pow(u0, -e1) * std::pow(v0, -e2);
        t.du = -e1 * t.value / u0;
        t.dv = -e2 * t.value / v0;
        return t;
    }

    std::vector<Vec3> straight_line(const Vec3 &start, const Vec3 &end, int slots)
    {
        std::vector<Vec3> q(slots);
        for (int l = 0; l < slots; ++l)
        {
            const double t = slots > 1 ? static_cast<double>(l) / (slots - 1) : 0.0;
            q[l] = start + t * (end - start);
        }
        if (slots > 1)
            q.back() = end;
        return q;
    }

    double term_gain(const TrajectoryTerm &t, double u, double v, double k1, double k2)
    {
        const double path = std::pow(u, k1) * std::pow(v, k2);
        return t.a / path + t.b / std::sqrt(path) + t.g0;
    }

    double trajectory_objective(const TrajectoryProblem &p, const std::vector<Vec3> &q)
    {
        double sum = 0.0;
        for (const auto &t : p.terms)
        {
            const double g = term_gain(t, dist(q[t.slot], p.users[t.user]), dist(q[t.slot], p.bs), p.k1, p.k2);
            if (!(g > 0.0))
                return inf;
            sum += t.c * t.c / g;
        }
        return sum;
    }

    ScaState initial_sca_state(const TrajectoryProblem &p, const std::vector<Vec3> &q, double margin)
    {
        ScaState s;
        s.q = q;
        s.u.assign(p.slots, std::vector<double>(p.users.size()));
        s.v.resize(p.slots);
        for (int l = 0; l < p.slots; ++l)
        {
            for (std::size_t k = 0; k < p.users.size(); ++k)
                s.u[l][k] = dist(q[l], p.users[k]) * (1.0 + margin);
            s.v[l] = dist(q[l], p.bs) * (1.0 + margin);
        }
        return s;
    }

    double slack_objective(const TrajectoryProblem &p, const ScaState &s, const std::vector<double> &x)
    {
        double sum = 0.0;
        for (std::size_t i = 0; i < p.terms.size(); ++i)
        {
            const auto &t = p.terms[i];
            sum += 2.0 * x[i] * t.c - x[i] * x[i] * term_gain(t, s.u[t.slot][t.user], s.v[t.slot], p.k1, p.k2);
        }
        return sum;
    }

    double constraint_violation(const TrajectoryProblem &p, const ScaState &s)
    {
        double worst = 0.0;
        for (int l = 0; l < p.slots; ++l)
        {
            for (std::size_t k = 0; k < p.users.size(); ++k)
                worst = std::max(worst, dist(s.q[l], p.users[k]) - s.u[l][k]);
            worst = std::max(worst, dist(s.q[l], p.bs) - s.v[l]);
            if (l + 1 < p.slots)
                worst = std::max(worst, dist(s.q[l + 1], s.q[l]) - p.d_max);
        }
        worst = std::max(worst, (s.q.front() - p.start).norm());
        worst = std::max(worst, (s.q.back() - p.end).norm());
        return worst;
    }

    namespace
    {
        // Per-term pieces of the convexified objective around (u0, v0).
        struct TermModel
        {
            int ui = -1, vi = -1;
            double u0 = 0.0, v0 = 0.0;
            double weight = 0.0;     // x^2
            double constant = 0.0;   // 2 x c - x^2 g0
            TangentPlane a_plane;    // tangent of a / (u^k1 v^k2)
            TangentPlane b_plane;    // tangent of b / sqrt(...), used when b >= 0
            bool b_exact = false;    // b < 0: keep b / sqrt(...) exact (convex after the sign flip)
            double b = 0.0;
        };

        double surrogate_of(const std::vector<TermModel> &models, const Eigen::VectorXd &z, double k1, double k2)
        {
            double sum = 0.0;
            for (const auto &m : models)
            {
                const double u = z(m.ui), v = z(m.vi);
                double g = m.a_plane.at(u, v, m.u0, m.v0);
                g += m.b_exact ? m.b * std::pow(u, -k1 / 2.0) * std::pow(v, -k2 / 2.0) : m.b_plane.at(u, v, m.u0, m.v0);
                sum += m.constant - m.weight * g;
            }
            return sum;
        }
    }

    ScaStepResult sca_step(const TrajectoryProblem &p, const ScaState &s, const std::vector<double> &x,
                           const TrajectoryOptions &opts)
    {
        ScaStepResult out;
        out.state = s;
        out.before = slack_objective(p, s, x);
        out.after = out.before;
        const int slots = p.slots;
        const int free_slots = std::max(slots - 2, 0);

        // variable layout: free (x, y) pairs, then the slacks that appear in some term
        int dim = 2 * free_slots;
        std::map<std::pair<int, int>, int> u_index;
        std::map<int, int> v_index;
        for (const auto &t : p.terms)
        {
            if (!u_index.count({t.slot, t.user}))
                u_index[{t.slot, t.user}] = dim++;
        }
        for (const auto &t : p.terms)
        {
            if (!v_index.count(t.slot))
                v_index[t.slot] = dim++;
        }
        if (p.terms.empty())
        {
            out.solved = true;
            return out;
        }

        Eigen::VectorXd z0(dim);
        for (int l = 1; l + 1 < slots; ++l)
        {
            z0(2 * (l - 1)) = s.q[l].x();
            z0(2 * (l - 1) + 1) = s.q[l].y();
        }
        for (const auto &[key, idx] : u_index)
            z0(idx) = s.u[key.first][key.second];
        for (const auto &[slot, idx] : v_index)
            z0(idx) = s.v[slot];

        double scale = 0.0;
        std::vector<TermModel> models(p.terms.size());
        for (std::size_t i = 0; i < p.terms.size(); ++i)
        {
            const auto &t = p.terms[i];
            auto &m = models[i];
            m.ui = u_index.at({t.slot, t.user});
            m.vi = v_index.at(t.slot);
            m.u0 = z0(m.ui);
            m.v0 = z0(m.vi);
            m.weight = x[i] * x[i];
            m.constant = 2.0 * x[i] * t.c - m.weight * t.g0;
            m.a_plane = linearize_power_term(t.a, m.u0, m.v0, p.k1, p.k2);
            m.b = t.b;
            m.b_exact = t.b < 0.0;
            if (!m.b_exact)
                m.b_plane = linearize_power_term(t.b, m.u0, m.v0, p.k1 / 2.0, p.k2 / 2.0);
            scale += m.weight * term_gain(t, m.u0, m.v0, p.k1, p.k2);
        }
        if (!(scale > 0.0))
            scale = 1.0;

        auto q_of = [&](const Eigen::VectorXd &z, int l) -> Vec3
        {
            if (l == 0)
                return p.start;
            if (l == slots - 1)
                return p.end;
            return {z(2 * (l - 1)), z(2 * (l - 1) + 1), p.start.z()};
        };
        auto qx = [&](int l) { return (l == 0 || l == slots - 1) ? -1 : 2 * (l - 1); };

        ConvexProgram prog;
        prog.dim = dim;
        const double k1 = p.k1, k2 = p.k2;
        prog.objective = [&models, scale, k1, k2](const Eigen::VectorXd &z, bool derivatives)
        {
            SparseEval e;
            for (const auto &m : models)
            {
                const double u = z(m.ui), v = z(m.vi);
                if (!(u > 0.0 && v > 0.0))
                {
                    e.value = inf;
                    return e;
                }
            }
            e.value = surrogate_of(models, z, k1, k2) / scale;
            if (!derivatives)
                return e;
            for (const auto &m : models)
            {
                const double w = m.weight / scale;
                double gu = m.a_plane.du, gv = m.a_plane.dv;
                if (!m.b_exact)
                {
                    gu += m.b_plane.du;
                    gv += m.b_plane.dv;
                }
                else
                {
                    const double u = z(m.ui), v = z(m.vi);
                    const double e1 = k1 / 2.0, e2 = k2 / 2.0;
                    const double psi = m.b * std::pow(u, -e1) * std::pow(v, -e2);
                    gu += -e1 * psi / u;
                    gv += -e2 * psi / v;
                    e.hess.emplace_back(m.ui, m.ui, -w * e1 * (e1 + 1.0) * psi / (u * u));
                    e.hess.emplace_back(m.vi, m.vi, -w * e2 * (e2 + 1.0) * psi / (v * v));
                    e.hess.emplace_back(std::min(m.ui, m.vi), std::max(m.ui, m.vi), -w * e1 * e2 * psi / (u * v));
                }
                e.grad.emplace_back(m.ui, -w * gu);
                e.grad.emplace_back(m.vi, -w * gv);
            }
            return e;
        };

        // d(q_l, target)^2 + s0^2 - 2 s0 s <= 0
        auto slack_constraint = [&](int l, const Vec3 &target, int si, double s0)
        {
            const int xi = qx(l);
            return [=](const Eigen::VectorXd &z, bool derivatives)
            {
                const Vec3 q = q_of(z, l);
                SparseEval e;
                e.value = (q - target).squaredNorm() + s0 * s0 - 2.0 * s0 * z(si);
                if (!derivatives)
                    return e;
                e.grad.emplace_back(si, -2.0 * s0);
                if (xi >= 0)
                {
                    e.grad.emplace_back(xi, 2.0 * (q.x() - target.x()));
                    e.grad.emplace_back(xi + 1, 2.0 * (q.y() - target.y()));
                    e.hess.emplace_back(xi, xi, 2.0);
                    e.hess.emplace_back(xi + 1, xi + 1, 2.0);
                }
                return e;
            };
        };
        auto upper_bound = [](int si, double cap)
        {
            return [=](const Eigen::VectorXd &z, bool derivatives)
            {
                SparseEval e;
                e.value = z(si) - cap;
                if (derivatives)
                    e.grad.emplace_back(si, 1.0);
                return e;
            };
        };
        for (const auto &[key, idx] : u_index)
        {
            prog.inequalities.push_back(slack_constraint(key.first, p.users[key.second], idx, z0(idx)));
            prog.inequalities.push_back(upper_bound(idx, 4.0 * z0(idx) + 100.0));
        }
        for (const auto &[slot, idx] : v_index)
        {
            prog.inequalities.push_back(slack_constraint(slot, p.bs, idx, z0(idx)));
            prog.inequalities.push_back(upper_bound(idx, 4.0 * z0(idx) + 100.0));
        }
        const double dmax2 = p.d_max * p.d_max;
        for (int l = 0; l + 1 < slots; ++l)
        {
            const int xa = qx(l), xb = qx(l + 1);
            if (xa < 0 && xb < 0)
                continue;
            prog.inequalities.push_back(
                [=](const Eigen::VectorXd &z, bool derivatives)
                {
                    const Vec3 d = q_of(z, l + 1) - q_of(z, l);
                    SparseEval e;
                    e.value = d.squaredNorm() - dmax2;
                    if (!derivatives)
                        return e;
                    for (int c = 0; c < 2; ++c)
                    {
                        if (xb >= 0)
                        {
                            e.grad.emplace_back(xb + c, 2.0 * d(c));
                            e.hess.emplace_back(xb + c, xb + c, 2.0);
                        }
                        if (xa >= 0)
                        {
                            e.grad.emplace_back(xa + c, -2.0 * d(c));
                            e.hess.emplace_back(xa + c, xa + c, 2.0);
                        }
                        if (xa >= 0 && xb >= 0)
                            e.hess.emplace_back(xa + c, xb + c, -2.0);
                    }
                    return e;
                });
        }

        ConvexResult sol;
        try
        {
            sol = solve_convex_program(prog, z0, opts.barrier);
        }
        catch (const SolverError &)
        {
            return out;
        }
        const double after = surrogate_of(models, sol.x, k1, k2);
        if (!(after <= out.before + 1e-12 * std::abs(out.before)) || !sol.x.allFinite())
            return out;

        ScaState next = s;
        for (int l = 1; l + 1 < slots; ++l)
            next.q[l] = q_of(sol.x, l);
        for (int l = 0; l < slots; ++l)
        {
            for (std::size_t k = 0; k < p.users.size(); ++k)
                next.u[l][k] = std::max(next.u[l][k], dist(next.q[l], p.users[k]));
            next.v[l] = std::max(next.v[l], dist(next.q[l], p.bs));
        }
        for (const auto &[key, idx] : u_index)
            next.u[key.first][key.second] = sol.x(idx);
        for (const auto &[slot, idx] : v_index)
            next.v[slot] = sol.x(idx);
        // slacks of pairs without terms follow the new geometry
        for (int l = 0; l < slots; ++l)
        {
            for (std::size_t k = 0; k < p.users.size(); ++k)
                if (!u_index.count({l, static_cast<int>(k)}))
                    next.u[l][k] = dist(next.q[l], p.users[k]) * (1.0 + 1e-6);
            if (!v_index.count(l))
                next.v[l] = dist(next.q[l], p.bs) * (1.0 + 1e-6);
        }
        out.state = std::move(next);
        out.after = after;
        out.solved = true;
        return out;
    }

    TrajectoryResult optimize_trajectory(const TrajectoryProblem &p, const std::vector<Vec3> &q0,
                                         const TrajectoryOptions &opts)
    {
        if (static_cast<int>(q0.size()) != p.slots)
            throw std::invalid_argument("optimize_trajectory: q0 must have one point per slot");
        TrajectoryResult res;
        res.q = q0;
        res.objective_before = trajectory_objective(p, q0);
        res.objective_after = res.objective_before;
        if (p.terms.empty() || p.slots <= 2 || !std::isfinite(res.objective_before))
            return res;

        std::vector<Vec3> q = q0;
        auto compute_x = [&](const std::vector<Vec3> &traj)
        {
            std::vector<double> x(p.terms.size());
            for (std::size_t i = 0; i < p.terms.size(); ++i)
            {
                const auto &t = p.terms[i];
                x[i] = quad_transform_x(t.c, term_gain(t, dist(traj[t.slot], p.users[t.user]), dist(traj[t.slot], p.bs),
                                                       p.k1, p.k2));
            }
            return x;
        };
        std::vector<double> x = compute_x(q);

        for (int round = 0; round < opts.max_rounds; ++round)
        {
            ++res.rounds;
            ScaState state = initial_sca_state(p, q);
            double current = slack_objective(p, state, x);
            for (int it = 0; it < opts.max_sca; ++it)
            {
                const ScaStepResult step = sca_step(p, state, x, opts);
                ++res.sca_iterations;
                if (!step.solved)
                {
                    ++res.solver_failures;
                    break;
                }
                const double next = slack_objective(p, step.state, x);
                if (next > current + 1e-12 * std::abs(current))
                    res.sca_monotone = false;
                res.slack_trace.push_back(next);
                const double decrease = current - next;
                state = step.state;
                current = next;
                if (decrease <= opts.sca_tol * std::abs(current))
                    break;
            }
            q = state.q;
            const double value = trajectory_objective(p, q);
            if (value <= res.objective_after)
            {
                res.objective_after = value;
                res.q = q;
            }
            std::vector<double> x_new;
            try
            {
                x_new = compute_x(q);
            }
            catch (const InfeasibleError &)
            {
                break;
            }
            double diff = 0.0, norm = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
            {
                diff += (x_new[i] - x[i]) * (x_new[i] - x[i]);
                norm += x[i] * x[i];
            }
            x = std::move(x_new);
            if (std::sqrt(diff) <= opts.eps5 * std::sqrt(norm))
                break;
        }
        return res;
    }
}
