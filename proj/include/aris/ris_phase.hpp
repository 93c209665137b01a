// SPDX-License-Identifier: Apache-2.0
//
// RIS phase design for one slot: quadratic transform, lifted SDP relaxation and
// Gaussian randomization.

#ifndef ARIS_RIS_PHASE_HPP
#define ARIS_RIS_PHASE_HPP

#include "aris/convex.hpp"
#include "aris/types.hpp"

#include <vector>

namespace aris
{
    // One active (user, RE) pair of a slot. With f the pair's beamformer:
    // h = scaled ARIS->BS channel (M_r x N), g = G f (N), hd = Hd f (M_r),
    // and gain(theta) = |h diag(g) theta + hd|^2.
    struct PhaseTerm
    {
        CMatrix h;
        CVector g;
        CVector hd;
        double c = 0.0; // sqrt(noise * (2^(r/w) - 1) * SAR)
    };

    struct PhaseOptions
    {
        double eps2 = 1e-5;
        int max_rounds = 20;
        int gr_samples = 100;
        SdpOptions sdp{};
    };

    struct PhaseResult
    {
        CVector theta;
        double objective_before = 0.0;
        double objective_after = 0.0;
        int rounds = 0;
        int sdp_solves = 0;
        bool sdp_failed = false;
    };

    // c / gain; throws InfeasibleError for gain <= 0.
    double quad_transform_y(double c, double gain);

    double term_gain(const PhaseTerm &t, const CVector &theta);

    // sum of c^2 / gain over the terms (infinite if some gain is zero)
    double phase_objective(const std::vector<PhaseTerm> &terms, const CVector &theta);

    // A = diag(g)^H h^H h diag(g), b = diag(g)^H h^H hd
    CMatrix lifting_block_a(const PhaseTerm &t);
    CVector lifting_block_b(const PhaseTerm &t);

    // R = [[sum y^2 A, sum y^2 b], [sum y^2 b^H, 0]]
    CMatrix build_lifting_matrix(const std::vector<PhaseTerm> &terms, const std::vector<double> &y);

    // Best of `samples` rank-one candidates U D^{1/2} r by theta_bar^H R theta_bar.
    CVector gaussian_randomization(const CMatrix &x, const CMatrix &r, int samples, Rng &rng);

    // Alternates y = c / gain and the SDR step; keeps theta only if the objective does not increase.
    PhaseResult optimize_phases(const std::vector<PhaseTerm> &terms, const CVector &theta0, Rng &rng,
                                const PhaseOptions &opts = {});
}

#endif
