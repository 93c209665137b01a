// SPDX-License-Identifier: Apache-2.0

#include "aris/orchestrator.hpp"
#include "aris/power_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aris
{
    namespace
    {
        bool same_trajectory(const std::vector<Vec3> &a, const std::vector<Vec3> &b)
        {
            if (a.size() != b.size())
                return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i] != b[i])
                    return false;
            return true;
        }

        int steps_needed(const Vec3 &a, const Vec3 &b, double d_max)
        {
            const double d = (a - b).norm();
            if (d <= 1e-9)
                return 0;
            return static_cast<int>(std::ceil(d / d_max - 1e-9));
        }
    }

    std::string scheme_name(Scheme s)
    {
        switch (s)
        {
        case Scheme::proposed:
            return "proposed";
        case Scheme::direct:
            return "direct";
        case Scheme::fixed:
            return "fixed";
        case Scheme::random_phases:
            return "random";
        case Scheme::zero_phases:
            return "zero";
        case Scheme::no_ris:
            return "no-ris";
        }
        return "unknown";
    }

    Scheme parse_scheme(const std::string &name)
    {
        for (Scheme s : {Scheme::proposed, Scheme::direct, Scheme::fixed, Scheme::random_phases, Scheme::zero_phases,
                         Scheme::no_ris})
            if (scheme_name(s) == name)
                return s;
        if (name == "optimized")
            return Scheme::proposed;
        throw ConfigError("unknown scheme '" + name + "' (expected proposed, direct, fixed, random, zero, no-ris)");
    }

    AoEngine::AoEngine(const Scenario &s, const ChannelRealization &ch, std::uint64_t trial, AoOptions opts)
        : scenario_(s),
          ch_(ch),
          trial_(trial),
          opts_(opts),
          beam_solver_(s.sar_model, opts.beam),
          users_(s.params.num_users),
          subcarriers_(s.params.num_subcarriers),
          ris_(s.params.num_ris_elements),
          noise_(s.params.noise_power())
    {
        if (ch.users() != users_ || ch.subcarriers() != subcarriers_ || ch.slots() != slots() ||
            ch.ris_elements() != ris_)
            throw std::invalid_argument("AoEngine: channel realization does not match the scenario");
    }

    AoEngine::Geometry AoEngine::geometry(int slot, const Vec3 &q) const
    {
        Geometry geo;
        geo.q = q;
        if (!opts_.use_ris)
            return geo;
        geo.h.resize(subcarriers_);
        geo.g.resize(static_cast<std::size_t>(users_) * subcarriers_);
        for (int n = 0; n < subcarriers_; ++n)
        {
            geo.h[n] = ch_.h(n, slot, q);
            for (int u = 0; u < users_; ++u)
                geo.g[u * subcarriers_ + n] = ch_.g(u, n, slot, q);
        }
        return geo;
    }

    CMatrix AoEngine::gram(const Geometry &geo, int slot, const CVector &theta, int u, int n) const
    {
        const CMatrix &hd = ch_.hd(u, n, slot);
        if (!opts_.use_ris || theta.size() == 0)
            return hd.adjoint() * hd;
        const CMatrix heff = geo.h[n] * theta.asDiagonal() * geo.g[u * subcarriers_ + n] + hd;
        return heff.adjoint() * heff;
    }

    void AoEngine::refresh(SlotState &st, int slot, const Geometry &geo) const
    {
        for (int n = 0; n < subcarriers_; ++n)
        {
            const int u = st.alloc.owner[n];
            if (u < 0)
            {
                st.gain[n] = 0.0;
                st.sar[n] = 0.0;
                continue;
            }
            const Beamformer &f = st.beam[u * subcarriers_ + n];
            st.gain[n] = gain_from_gram(gram(geo, slot, st.theta, u, n), f);
            st.sar[n] = reference_sar(scenario_.sar_model, f.alpha[0], f.alpha[1], f.beta[1]);
        }
    }

    double AoEngine::slot_exposure(const SlotState &st) const
    {
        double e = 0.0;
        for (int n = 0; n < subcarriers_; ++n)
            if (st.alloc.owner[n] >= 0)
                e += st.power[n] * st.sar[n];
        return e;
    }

    AllocationMatrix AoEngine::greedy_allocation(const Vec3 &q) const
    {
        const auto &p = scenario_.params;
        std::vector<double> d(users_);
        if (opts_.use_ris)
        {
            for (int u = 0; u < users_; ++u)
                d[u] = distance(scenario_.user_positions[u], q);
            return allocate(scenario_.rate_targets, d, distance(q, scenario_.bs_position), p.ris_pathloss_exp1,
                            p.ris_pathloss_exp2, p.bandwidth_per_re, subcarriers_);
        }
        for (int u = 0; u < users_; ++u)
            d[u] = distance(scenario_.user_positions[u], scenario_.bs_position);
        return allocate(scenario_.rate_targets, d, 1.0, p.direct_pathloss_exp, 0.0, p.bandwidth_per_re, subcarriers_);
    }

    CVector AoEngine::initial_theta(int slot) const
    {
        if (!opts_.use_ris)
            return CVector();
        if (opts_.phase_mode == PhaseMode::random)
        {
            Rng rng(derive_seed(scenario_.rng_seed, trial_, tag(StreamTag::random_phases), slot));
            std::uniform_real_distribution<double> phase(0.0, 2.0 * pi);
            CVector theta(ris_);
            for (int i = 0; i < ris_; ++i)
                theta(i) = std::polar(1.0, phase(rng));
            return theta;
        }
        return CVector::Ones(ris_);
    }

    bool AoEngine::powers_from_shares(SlotState &st) const
    {
        const auto &p = scenario_.params;
        std::vector<double> total(users_, 0.0);
        for (int n = 0; n < subcarriers_; ++n)
        {
            const int u = st.alloc.owner[n];
            if (u < 0)
            {
                st.power[n] = 0.0;
                continue;
            }
            if (st.rate_share[n] <= 0.0)
                st.power[n] = 0.0;
            else if (!(st.gain[n] > 0.0))
                return false;
            else
                st.power[n] = min_power_for_rate(st.rate_share[n], st.gain[n], noise_, p.bandwidth_per_re);
            total[u] += st.power[n];
        }
        for (int u = 0; u < users_; ++u)
            if (total[u] > p.p_max * (1.0 + 1e-12))
                return false;
        return true;
    }

    bool AoEngine::optimal_powers(SlotState &st, bool deallocate_idle)
    {
        const auto &p = scenario_.params;
        for (int u = 0; u < users_; ++u)
        {
            const std::vector<int> res = st.alloc.elements_of(u);
            if (res.empty())
                return false;
            PowerProblem prob;
            prob.rate_target = scenario_.rate_targets[u];
            prob.p_max = p.p_max;
            prob.noise = noise_;
            prob.bandwidth = p.bandwidth_per_re;
            for (int n : res)
                prob.links.push_back({st.gain[n], st.sar[n]});
            PowerAllocation pa;
            try
            {
                ++counters_.power_solves;
                pa = allocate_power(prob);
            }
            catch (const InfeasibleError &)
            {
                return false;
            }
            if (pa.newton_fallback)
                ++counters_.newton_fallbacks;
            for (std::size_t k = 0; k < res.size(); ++k)
            {
                st.power[res[k]] = pa.power[k];
                st.rate_share[res[k]] = pa.rate_share[k];
            }
        }
        if (deallocate_idle)
            for (int n = 0; n < subcarriers_; ++n)
                if (st.alloc.owner[n] >= 0 && st.power[n] <= 0.0)
                {
                    st.alloc.owner[n] = -1;
                    st.power[n] = st.rate_share[n] = st.gain[n] = st.sar[n] = 0.0;
                }
        return true;
    }

    bool AoEngine::optimize_slot_phases(SlotState &st, int slot, const Geometry &geo)
    {
        if (!opts_.use_ris || st.theta.size() == 0)
            return false;
        const auto &p = scenario_.params;
        std::vector<PhaseTerm> terms;
        for (int n = 0; n < subcarriers_; ++n)
        {
            const int u = st.alloc.owner[n];
            if (u < 0 || st.rate_share[n] <= 0.0)
                continue;
            const CVector f = st.beam[u * subcarriers_ + n].vector();
            PhaseTerm t;
            t.h = geo.h[n];
            t.g = geo.g[u * subcarriers_ + n] * f;
            t.hd = ch_.hd(u, n, slot) * f;
            t.c = std::sqrt(rate_scale(st.rate_share[n], noise_, p.bandwidth_per_re) * st.sar[n]);
            terms.push_back(std::move(t));
        }
        if (terms.empty())
            return false;
        Rng rng(derive_seed(scenario_.rng_seed, trial_, tag(StreamTag::randomization), slot, phase_calls_++));
        const PhaseResult res = optimize_phases(terms, st.theta, rng, opts_.phase);
        counters_.sdp_solves += res.sdp_solves;
        if (!(res.objective_after < res.objective_before))
            return false;
        st.theta = res.theta;
        refresh(st, slot, geo);
        return true;
    }

    bool AoEngine::beamforming_block(SlotState &st, int slot, const Geometry &geo, int iter, AoTrace &trace)
    {
        SlotState cand = st;
        bool changed = false;
        for (int n = 0; n < subcarriers_; ++n)
        {
            const int u = cand.alloc.owner[n];
            if (u < 0)
                continue;
            const std::size_t idx = static_cast<std::size_t>(u) * subcarriers_ + n;
            const BeamformingResult r = beam_solver_.optimize(gram(geo, slot, cand.theta, u, n), 1.0, cand.beam[idx]);
            counters_.dinkelbach_iterations += r.iterations;
            const double current = cand.gain[n] > 0.0 ? cand.sar[n] / cand.gain[n] : std::numeric_limits<double>::infinity();
            if (r.ratio < current)
            {
                cand.beam[idx] = r.f;
                changed = true;
            }
        }
        if (!changed)
            return false;
        refresh(cand, slot, geo);
        powers_from_shares(cand);
        // users whose budget breaks keep their previous beamformers
        for (int u = 0; u < users_; ++u)
        {
            double total = 0.0;
            for (int n : cand.alloc.elements_of(u))
                total += cand.power[n];
            if (total > scenario_.params.p_max * (1.0 + 1e-12))
                for (int n : cand.alloc.elements_of(u))
                {
                    const std::size_t idx = static_cast<std::size_t>(u) * subcarriers_ + n;
                    cand.beam[idx] = st.beam[idx];
                    cand.gain[n] = st.gain[n];
                    cand.sar[n] = st.sar[n];
                    cand.power[n] = st.power[n];
                }
        }
        const double before = slot_exposure(st), after = slot_exposure(cand);
        const bool accept = after <= before;
        trace.blocks.push_back({iter, slot, "beamforming", before, accept ? after : before, accept});
        if (accept)
            st = std::move(cand);
        return accept;
    }

    bool AoEngine::phase_block(SlotState &st, int slot, const Geometry &geo, int iter, AoTrace &trace)
    {
        if (opts_.phase_mode != PhaseMode::optimize || !opts_.use_ris)
            return false;
        SlotState cand = st;
        if (!optimize_slot_phases(cand, slot, geo))
            return false;
        const bool feasible = powers_from_shares(cand);
        const double before = slot_exposure(st), after = feasible ? slot_exposure(cand) : before;
        const bool accept = feasible && after <= before;
        trace.blocks.push_back({iter, slot, "phases", before, accept ? after : before, accept});
        if (accept)
            st = std::move(cand);
        return accept;
    }

    bool AoEngine::allocation_block(SlotState &st, int slot, const Geometry &geo, int iter, AoTrace &trace)
    {
        AllocationMatrix next = greedy_allocation(geo.q);
        if (next == st.alloc)
            return false;
        SlotState cand = st;
        cand.alloc = next;
        for (int n = 0; n < subcarriers_; ++n)
        {
            const int u = next.owner[n];
            if (u < 0 || st.alloc.owner[n] == u)
                continue;
            const std::size_t idx = static_cast<std::size_t>(u) * subcarriers_ + n;
            if (opts_.beamforming)
            {
                const BeamformingResult r = beam_solver_.optimize(gram(geo, slot, cand.theta, u, n), 1.0, cand.beam[idx]);
                counters_.dinkelbach_iterations += r.iterations;
                cand.beam[idx] = r.f;
            }
        }
        refresh(cand, slot, geo);
        const bool feasible = optimal_powers(cand, false);
        const double before = slot_exposure(st), after = feasible ? slot_exposure(cand) : before;
        const bool accept = feasible && after <= before;
        trace.blocks.push_back({iter, slot, "allocation", before, accept ? after : before, accept});
        if (accept)
            st = std::move(cand);
        return accept;
    }

    bool AoEngine::power_block(SlotState &st, int slot, const Geometry &, int iter, AoTrace &trace)
    {
        SlotState cand = st;
        const bool feasible = optimal_powers(cand, true);
        const double before = slot_exposure(st), after = feasible ? slot_exposure(cand) : before;
        const bool accept = feasible && after <= before;
        trace.blocks.push_back({iter, slot, "power", before, accept ? after : before, accept});
        if (accept)
            st = std::move(cand);
        return accept;
    }

    bool AoEngine::trajectory_block(SolutionState &state, std::vector<Geometry> &geos, int iter, AoTrace &trace)
    {
        const auto &p = scenario_.params;
        const int nt = slots();
        TrajectoryProblem prob;
        prob.users = scenario_.user_positions;
        prob.bs = scenario_.bs_position;
        prob.start = scenario_.aris_start;
        prob.end = scenario_.aris_end;
        prob.slots = nt;
        prob.d_max = p.max_step();
        prob.k1 = p.ris_pathloss_exp1;
        prob.k2 = p.ris_pathloss_exp2;
        for (int l = 0; l < nt; ++l)
        {
            const SlotState &st = state.slots[l];
            const Vec3 &q = state.trajectory[l];
            for (int n = 0; n < subcarriers_; ++n)
            {
                const int u = st.alloc.owner[n];
                if (u < 0 || st.rate_share[n] <= 0.0)
                    continue;
                const CVector f = st.beam[u * subcarriers_ + n].vector();
                const GainTerms gt = gain_decomposition(ch_.h_bar(n, l, q), st.theta, ch_.g_bar(u, n, l, q),
                                                        ch_.hd(u, n, l), f, p.los_pathloss_ref);
                TrajectoryTerm t;
                t.slot = l;
                t.user = u;
                t.a = gt.a;
                t.b = gt.b;
                t.g0 = gt.direct;
                t.c = std::sqrt(rate_scale(st.rate_share[n], noise_, p.bandwidth_per_re) * st.sar[n]);
                prob.terms.push_back(t);
            }
        }
        const TrajectoryResult res = optimize_trajectory(prob, state.trajectory, opts_.traj);
        counters_.sca_iterations += res.sca_iterations;
        if (res.solver_failures > 0)
            trace.warnings.push_back("iteration " + std::to_string(iter) + ": " + std::to_string(res.solver_failures) +
                                     " trajectory subproblem(s) failed");
        // model gains below the AO tolerance are not worth the misaligned phases
        if (same_trajectory(res.q, state.trajectory) ||
            !(res.objective_after < res.objective_before * (1.0 - opts_.eps)))
            return false;

        const double before = exposure_index(state);
        const PhaseOptions saved = opts_.phase;
        opts_.phase.max_rounds = std::min(opts_.phase.max_rounds, opts_.candidate_phase_rounds);
        struct Restore
        {
            PhaseOptions &target;
            PhaseOptions value;
            ~Restore() { target = value; }
        } restore{opts_.phase, saved};
        double t = 1.0;
        for (int k = 0; k < std::max(opts_.trajectory_backtracks, 1); ++k, t *= 0.5)
        {
            SolutionState cand = state;
            for (int l = 0; l < nt; ++l)
                cand.trajectory[l] = state.trajectory[l] + t * (res.q[l] - state.trajectory[l]);
            cand.trajectory.front() = scenario_.aris_start;
            cand.trajectory.back() = scenario_.aris_end;
            std::vector<Geometry> cand_geos(nt);
            bool feasible = true;
            for (int l = 0; l < nt && feasible; ++l)
            {
                cand_geos[l] = geometry(l, cand.trajectory[l]);
                SlotState &st = cand.slots[l];
                refresh(st, l, cand_geos[l]);
                if (opts_.phases && opts_.phase_mode == PhaseMode::optimize)
                    optimize_slot_phases(st, l, cand_geos[l]);
                feasible = optimal_powers(st, true);
            }
            const double after = feasible ? exposure_index(cand) : before;
            const bool accept = feasible && after <= before;
            trace.blocks.push_back({iter, -1, "trajectory", before, accept ? after : before, accept});
            if (accept)
            {
                cand.exposure_index = after;
                state = std::move(cand);
                geos = std::move(cand_geos);
                return true;
            }
        }
        return false;
    }

    SolutionState AoEngine::initialize(const std::vector<Vec3> &trajectory)
    {
        const auto &p = scenario_.params;
        if (static_cast<int>(trajectory.size()) != slots())
            throw std::invalid_argument("initialize: trajectory must have one point per slot");
        SolutionState state;
        state.trajectory = trajectory;
        state.slots.resize(slots());
        std::vector<int> infeasible;
        for (int l = 0; l < slots(); ++l)
        {
            SlotState &st = state.slots[l];
            const Geometry geo = geometry(l, trajectory[l]);
            st.alloc = greedy_allocation(trajectory[l]);
            st.beam.assign(static_cast<std::size_t>(users_) * subcarriers_, Beamformer::two(1.0, 0.0));
            st.power.assign(subcarriers_, 0.0);
            st.rate_share.assign(subcarriers_, 0.0);
            st.gain.assign(subcarriers_, 0.0);
            st.sar.assign(subcarriers_, 0.0);
            st.theta = initial_theta(l);
            for (int n = 0; n < subcarriers_; ++n)
            {
                const int u = st.alloc.owner[n];
                if (u >= 0)
                    st.rate_share[n] = scenario_.rate_targets[u] / st.alloc.count(u);
            }
            refresh(st, l, geo);
            if (powers_from_shares(st))
                continue;
            if (optimal_powers(st, false))
                continue;
            for (int u = 0; u < users_; ++u)
            {
                PowerProblem prob;
                prob.rate_target = scenario_.rate_targets[u];
                prob.p_max = p.p_max;
                prob.noise = noise_;
                prob.bandwidth = p.bandwidth_per_re;
                bool dead = false;
                for (int n : st.alloc.elements_of(u))
                {
                    dead = dead || !(st.gain[n] > 0.0);
                    prob.links.push_back({st.gain[n], st.sar[n]});
                }
                if (dead || prob.links.empty() || min_total_power(prob) > p.p_max)
                    if (std::find(infeasible.begin(), infeasible.end(), u) == infeasible.end())
                        infeasible.push_back(u);
            }
        }
        if (!infeasible.empty())
        {
            std::sort(infeasible.begin(), infeasible.end());
            std::ostringstream msg;
            msg << "initialization: rate targets unreachable within p_max for user(s)";
            for (int u : infeasible)
                msg << ' ' << u;
            throw InfeasibleError(msg.str());
        }
        state.exposure_index = exposure_index(state);
        audit(state);
        return state;
    }

    SolutionState AoEngine::run(SolutionState state, AoTrace &trace)
    {
        const int nt = slots();
        std::vector<Geometry> geos(nt);
        for (int l = 0; l < nt; ++l)
            geos[l] = geometry(l, state.trajectory[l]);
        double index = exposure_index(state);
        state.exposure_index = index;
        if (trace.index_trace.empty())
            trace.index_trace.push_back(index);
        const int base_iter = trace.outer_iterations;
        trace.converged = false;

        auto guarded = [&](const char *name, int iter, auto &&fn)
        {
            try
            {
                fn();
            }
            catch (const SolverError &e)
            {
                trace.warnings.push_back("iteration " + std::to_string(iter) + ": " + name + " skipped: " + e.what());
            }
            catch (const InfeasibleError &e)
            {
                trace.warnings.push_back("iteration " + std::to_string(iter) + ": " + name + " skipped: " + e.what());
            }
        };

        for (int it = 0; it < opts_.max_outer; ++it)
        {
            const int iter = base_iter + it + 1;
            const double previous = index;
            for (int l = 0; l < nt; ++l)
            {
                SlotState &st = state.slots[l];
                if (opts_.beamforming)
                    guarded("beamforming", iter, [&] { beamforming_block(st, l, geos[l], iter, trace); });
                if (opts_.phases)
                    guarded("phases", iter, [&] { phase_block(st, l, geos[l], iter, trace); });
                if (opts_.allocation)
                    guarded("allocation", iter, [&] { allocation_block(st, l, geos[l], iter, trace); });
                if (opts_.power)
                    guarded("power", iter, [&] { power_block(st, l, geos[l], iter, trace); });
            }
            if (opts_.trajectory && opts_.use_ris && nt > 2)
                guarded("trajectory", iter, [&] { trajectory_block(state, geos, iter, trace); });

            index = exposure_index(state);
            state.exposure_index = index;
            audit(state);
            trace.index_trace.push_back(index);
            ++trace.outer_iterations;
            if (std::abs(previous - index) <= opts_.eps * previous)
            {
                trace.converged = true;
                break;
            }
        }
        trace.counters = counters_;
        return state;
    }

    std::vector<std::vector<double>> AoEngine::exposure_table(const SolutionState &state) const
    {
        std::vector<std::vector<double>> table(state.slots.size(), std::vector<double>(users_, 0.0));
        for (std::size_t l = 0; l < state.slots.size(); ++l)
        {
            const SlotState &st = state.slots[l];
            for (int n = 0; n < subcarriers_; ++n)
                if (st.alloc.owner[n] >= 0)
                    table[l][st.alloc.owner[n]] += st.power[n] * st.sar[n];
        }
        return table;
    }

    double AoEngine::exposure_index(const SolutionState &state) const
    {
        if (users_ == 0 || state.slots.empty())
            return 0.0;
        return aris::exposure_index(exposure_table(state), scenario_.params.slot_duration);
    }

    double AoEngine::achieved_rate(const SolutionState &state, int slot, int u) const
    {
        const SlotState &st = state.slots[slot];
        double r = 0.0;
        for (int n = 0; n < subcarriers_; ++n)
            if (st.alloc.owner[n] == u)
                r += achievable_rate(1.0, st.power[n], st.gain[n], scenario_.params.bandwidth_per_re, noise_);
        return r;
    }

    ExposureReport AoEngine::report(const SolutionState &state, const std::string &label) const
    {
        ExposureReport rep;
        rep.label = label;
        rep.per_user_exposure = exposure_table(state);
        rep.exposure_index = exposure_index(state);
        rep.achieved_rates.assign(users_, std::numeric_limits<double>::infinity());
        for (int u = 0; u < users_; ++u)
            for (int l = 0; l < static_cast<int>(state.slots.size()); ++l)
                rep.achieved_rates[u] = std::min(rep.achieved_rates[u], achieved_rate(state, l, u));
        return rep;
    }

    void AoEngine::audit(const SolutionState &state) const
    {
        const auto &p = scenario_.params;
        auto fail = [](const std::string &what, int slot, int who)
        {
            std::ostringstream msg;
            msg << "feasibility audit: " << what << " violated at slot " << slot;
            if (who >= 0)
                msg << ", index " << who;
            throw SolverError(msg.str());
        };
        if (static_cast<int>(state.slots.size()) != slots() || static_cast<int>(state.trajectory.size()) != slots())
            throw SolverError("feasibility audit: state has the wrong number of slots");
        for (int l = 0; l < slots(); ++l)
        {
            const SlotState &st = state.slots[l];
            if (st.alloc.subcarriers() != subcarriers_)
                fail("allocation shape", l, -1);
            for (int n = 0; n < subcarriers_; ++n)
            {
                const int u = st.alloc.owner[n];
                if (u < -1 || u >= users_)
                    fail("RE ownership", l, n);
                if (!(st.power[n] >= 0.0) || (u < 0 && st.power[n] != 0.0))
                    fail("power nonnegativity", l, n);
                if (u >= 0)
                {
                    st.beam[u * subcarriers_ + n].validate();
                    if (st.power[n] > 0.0 && !(std::isfinite(st.gain[n]) && st.gain[n] > 0.0))
                        fail("finite positive gain", l, n);
                }
            }
            for (int u = 0; u < users_; ++u)
            {
                double total = 0.0;
                for (int n : st.alloc.elements_of(u))
                    total += st.power[n];
                if (total > p.p_max * (1.0 + 1e-9))
                    fail("per-user power budget", l, u);
                if (achieved_rate(state, l, u) < scenario_.rate_targets[u] * (1.0 - 1e-6))
                    fail("rate target", l, u);
            }
            if (opts_.use_ris)
            {
                if (st.theta.size() != ris_)
                    fail("phase vector length", l, -1);
                for (int i = 0; i < ris_; ++i)
                    if (std::abs(std::abs(st.theta(i)) - 1.0) > 1e-9)
                        fail("unit-modulus phase", l, i);
            }
        }
        const auto &q = state.trajectory;
        if ((q.front() - scenario_.aris_start).norm() > 1e-9)
            fail("trajectory start point", 0, -1);
        if ((q.back() - scenario_.aris_end).norm() > 1e-9)
            fail("trajectory end point", slots() - 1, -1);
        for (int l = 1; l < slots(); ++l)
            if ((q[l] - q[l - 1]).norm() > p.max_step() + 1e-6)
                fail("maximum displacement", l, -1);
    }

    std::vector<Vec3> AoEngine::hover_trajectory(const Vec3 &hover) const
    {
        const int nt = slots();
        const double d = scenario_.params.max_step();
        const Vec3 &s = scenario_.aris_start, &e = scenario_.aris_end;
        std::vector<Vec3> q(nt, hover);
        const double to = (hover - s).norm(), back = (e - hover).norm();
        const int k1 = steps_needed(s, hover, d), k2 = steps_needed(hover, e, d);
        if (k1 + k2 > nt - 1)
            throw std::invalid_argument("hover_trajectory: hover point is not reachable in time");
        for (int l = 0; l <= k1; ++l)
            q[l] = to > 0.0 ? Vec3(s + std::min(l * d, to) / to * (hover - s)) : s;
        for (int l = 0; l <= k2; ++l)
            q[nt - 1 - l] = back > 0.0 ? Vec3(e + std::min(l * d, back) / back * (hover - e)) : e;
        q.front() = s;
        q.back() = e;
        return q;
    }

    Vec3 AoEngine::hover_search(std::vector<Vec3> *visited)
    {
        const int nt = slots();
        const double d = scenario_.params.max_step();
        const double inf = std::numeric_limits<double>::infinity();
        PhaseOptions one_round = opts_.phase;
        one_round.max_rounds = 1;
        // nobody to serve: any reachable point will do
        if (users_ == 0)
            return scenario_.aris_start;

        auto proxy = [&](const Vec3 &h)
        {
            if (visited)
                visited->push_back(h);
            if (steps_needed(scenario_.aris_start, h, d) + steps_needed(h, scenario_.aris_end, d) > nt - 1)
                return inf;
            try
            {
                const std::vector<Vec3> q = hover_trajectory(h);
                SolutionState st = initialize(q);
                const PhaseOptions saved = opts_.phase;
                opts_.phase = one_round;
                for (int l = 0; l < nt; ++l)
                {
                    const Geometry geo = geometry(l, q[l]);
                    if (opts_.phase_mode == PhaseMode::optimize)
                        optimize_slot_phases(st.slots[l], l, geo);
                    if (!optimal_powers(st.slots[l], true))
                    {
                        opts_.phase = saved;
                        return inf;
                    }
                }
                opts_.phase = saved;
                return exposure_index(st);
            }
            catch (const InfeasibleError &)
            {
                return inf;
            }
        };

        const double z = scenario_.params.aris_height;
        Vec3 centre(0.0, 0.0, z);
        double best = proxy(centre);
        for (double r = scenario_.cell_radius; r >= 1.0; r *= 0.5)
        {
            Vec3 next = centre;
            double next_value = best;
            for (int k = 0; k < 8; ++k)
            {
                const double a = 2.0 * pi * k / 8.0;
                const Vec3 c(centre.x() + r * std::cos(a), centre.y() + r * std::sin(a), z);
                const double v = proxy(c);
                if (v < next_value)
                {
                    next_value = v;
                    next = c;
                }
            }
            centre = next;
            best = next_value;
        }
        if (!std::isfinite(best))
            throw InfeasibleError("hover search: no reachable hover point serves every user");
        return centre;
    }

    SchemeResult run_scheme(const Scenario &s, const ChannelRealization &ch, std::uint64_t trial, Scheme scheme,
                            const AoOptions &base)
    {
        SchemeResult out;
        AoOptions opts = base;
        const bool two_stage =
            scheme == Scheme::proposed || scheme == Scheme::random_phases || scheme == Scheme::zero_phases;
        if (scheme == Scheme::random_phases)
            opts.phase_mode = PhaseMode::random;
        else if (scheme == Scheme::zero_phases)
            opts.phase_mode = PhaseMode::zero;
        else if (scheme == Scheme::no_ris)
            opts.use_ris = false;
        const bool trajectory = base.trajectory && two_stage;
        opts.trajectory = false;

        AoEngine engine(s, ch, trial, opts);
        SolutionState state;
        if (scheme == Scheme::fixed)
            state = engine.initialize(engine.hover_trajectory(engine.hover_search()));
        else
            state = engine.initialize();
        // the straight-line solution seeds the trajectory stage
        state = engine.run(std::move(state), out.trace);
        if (trajectory)
        {
            engine.options().trajectory = true;
            state = engine.run(std::move(state), out.trace);
        }
        out.report = engine.report(state, scheme_name(scheme));
        out.state = std::move(state);
        return out;
    }

    namespace
    {
        ExposureReport scheme_report(const Scenario &s, Scheme scheme, const AoOptions &base)
        {
            const ChannelRealization ch(s, 0);
            return run_scheme(s, ch, 0, scheme, base).report;
        }
    }

    ExposureReport baseline_no_ris(const Scenario &s, const AoOptions &base)
    {
        return scheme_report(s, Scheme::no_ris, base);
    }

    ExposureReport baseline_fixed_ris(const Scenario &s, const AoOptions &base)
    {
        return scheme_report(s, Scheme::fixed, base);
    }

    ExposureReport baseline_unoptimized_phases(const Scenario &s, PhaseMode mode, const AoOptions &base)
    {
        if (mode == PhaseMode::optimize)
            throw std::invalid_argument("baseline_unoptimized_phases: mode must be zero or random");
        return scheme_report(s, mode == PhaseMode::zero ? Scheme::zero_phases : Scheme::random_phases, base);
    }

    SchemeResult run_ao(const Scenario &s, const AoOptions &base)
    {
        const ChannelRealization ch(s, 0);
        return run_scheme(s, ch, 0, Scheme::proposed, base);
    }
}
