// SPDX-License-Identifier: Apache-2.0
//
// Alternating optimization over beamformers, RIS phases, RE allocation, power
// and trajectory, plus the benchmark schemes built on the same machinery.

#ifndef ARIS_ORCHESTRATOR_HPP
#define ARIS_ORCHESTRATOR_HPP

#include "aris/beamforming.hpp"
#include "aris/channel.hpp"
#include "aris/exposure.hpp"
#include "aris/re_alloc.hpp"
#include "aris/ris_phase.hpp"
#include "aris/scenario.hpp"
#include "aris/trajectory.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace aris
{
    enum class Scheme
    {
        proposed,      // optimized phases and trajectory
        direct,        // optimized phases on the straight start-end path
        fixed,         // hover at a searched point, travel legs at full speed
        random_phases, // random RIS phases
        zero_phases,   // all RIS phases zero
        no_ris         // direct link only
    };

    std::string scheme_name(Scheme s);
    Scheme parse_scheme(const std::string &name); // throws ConfigError

    enum class PhaseMode
    {
        optimize,
        zero,
        random
    };

    struct AoOptions
    {
        double eps = 1e-4; // relative change of the exposure index
        int max_outer = 10;
        bool beamforming = true;
        bool phases = true;
        bool allocation = true;
        bool power = true;
        bool trajectory = true;
        bool use_ris = true;
        PhaseMode phase_mode = PhaseMode::optimize;
        int trajectory_backtracks = 4;
        int candidate_phase_rounds = 5; // phase rounds when scoring a trajectory candidate
        BeamformingOptions beam{};
        PhaseOptions phase{};
        TrajectoryOptions traj{};
    };

    struct SlotState
    {
        AllocationMatrix alloc;
        std::vector<Beamformer> beam;   // [u * N_c + n]
        std::vector<double> power;      // [n], W; zero on unassigned REs
        std::vector<double> rate_share; // [n], bit/s
        CVector theta;                  // RIS phases (empty without RIS)
        std::vector<double> gain;       // [n], owner's gain
        std::vector<double> sar;        // [n], owner's reference SAR
    };

    struct SolutionState
    {
        std::vector<SlotState> slots;
        std::vector<Vec3> trajectory;
        double exposure_index = 0.0;
    };

    struct BlockDelta
    {
        int iteration = 0;
        int slot = -1; // -1 for blocks spanning all slots
        std::string block;
        double before = 0.0;
        double after = 0.0;
        bool accepted = false;
    };

    struct Counters
    {
        long sdp_solves = 0;
        long sca_iterations = 0;
        long dinkelbach_iterations = 0;
        long power_solves = 0;
        long newton_fallbacks = 0;
    };

    struct AoTrace
    {
        std::vector<double> index_trace; // after initialization, then after every outer iteration
        std::vector<BlockDelta> blocks;
        std::vector<std::string> warnings;
        Counters counters;
        int outer_iterations = 0;
        bool converged = false;
    };

    struct SchemeResult
    {
        SolutionState state;
        ExposureReport report;
        AoTrace trace;
    };

    // Runs the optimization blocks on one trial's channels. Holds references to the
    // scenario and channels, which must outlive it.
    class AoEngine
    {
    public:
        AoEngine(const Scenario &s, const ChannelRealization &ch, std::uint64_t trial, AoOptions opts = {});

        // Straight-line (or given) trajectory, zero phases, unit beamformers, greedy
        // allocation with equal rate shares and minimum powers. Falls back to the
        // optimal power split per user when equal shares break the budget; throws
        // InfeasibleError listing users that cannot be served at all.
        SolutionState initialize(const std::vector<Vec3> &trajectory);
        SolutionState initialize() { return initialize(straight_line(scenario_.aris_start, scenario_.aris_end, slots())); }

        // Safeguarded AO loop from `state`; appends to `trace`.
        SolutionState run(SolutionState state, AoTrace &trace);

        // Per-user per-slot exposure and the index of a state
        std::vector<std::vector<double>> exposure_table(const SolutionState &state) const;
        double exposure_index(const SolutionState &state) const;
        ExposureReport report(const SolutionState &state, const std::string &label) const;

        // Throws SolverError naming the violated constraint.
        void audit(const SolutionState &state) const;

        // Achieved rate of user u in one slot
        double achieved_rate(const SolutionState &state, int slot, int u) const;

        // Hover point chosen by a halving-radius search over the cell
        Vec3 hover_search(std::vector<Vec3> *visited = nullptr);
        std::vector<Vec3> hover_trajectory(const Vec3 &hover) const;

        AoOptions &options() { return opts_; }
        int slots() const { return scenario_.params.num_slots; }

    private:
        struct Geometry
        {
            Vec3 q;
            std::vector<CMatrix> h; // [n], M_r x N
            std::vector<CMatrix> g; // [u * N_c + n], N x M_t
        };

        Geometry geometry(int slot, const Vec3 &q) const;
        CMatrix gram(const Geometry &geo, int slot, const CVector &theta, int u, int n) const;
        void refresh(SlotState &st, int slot, const Geometry &geo) const;
        double slot_exposure(const SlotState &st) const;
        AllocationMatrix greedy_allocation(const Vec3 &q) const;
        CVector initial_theta(int slot) const;

        // Powers for the current shares; false if some user exceeds the budget.
        bool powers_from_shares(SlotState &st) const;
        // Optimal split per user; false if some user is infeasible.
        bool optimal_powers(SlotState &st, bool deallocate_idle);
        bool optimize_slot_phases(SlotState &st, int slot, const Geometry &geo);

        bool beamforming_block(SlotState &st, int slot, const Geometry &geo, int iter, AoTrace &trace);
        bool phase_block(SlotState &st, int slot, const Geometry &geo, int iter, AoTrace &trace);
        bool allocation_block(SlotState &st, int slot, const Geometry &geo, int iter, AoTrace &trace);
        bool power_block(SlotState &st, int slot, const Geometry &geo, int iter, AoTrace &trace);
        bool trajectory_block(SolutionState &state, std::vector<Geometry> &geos, int iter, AoTrace &trace);

        const Scenario &scenario_;
        const ChannelRealization &ch_;
        std::uint64_t trial_;
        AoOptions opts_;
        BeamformingSolver beam_solver_;
        int users_, subcarriers_, ris_;
        double noise_;
        std::uint64_t phase_calls_ = 0;
        Counters counters_;
    };

    // One scheme on one trial's channels (users and fading already drawn).
    SchemeResult run_scheme(const Scenario &s, const ChannelRealization &ch, std::uint64_t trial, Scheme scheme,
                            const AoOptions &base = {});

    // Convenience wrappers that draw channels for trial 0 of the scenario
    ExposureReport baseline_no_ris(const Scenario &s, const AoOptions &base = {});
    ExposureReport baseline_fixed_ris(const Scenario &s, const AoOptions &base = {});
    ExposureReport baseline_unoptimized_phases(const Scenario &s, PhaseMode mode, const AoOptions &base = {});
    SchemeResult run_ao(const Scenario &s, const AoOptions &base = {});
}

#endif
