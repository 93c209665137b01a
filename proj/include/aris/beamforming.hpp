// SPDX-License-Identifier: Apache-2.0
//
// Dinkelbach iteration for the per-RE beamformer minimizing SAR / gain.

#ifndef ARIS_BEAMFORMING_HPP
#define ARIS_BEAMFORMING_HPP

#include "aris/channel.hpp"
#include "aris/exposure.hpp"

#include <vector>

namespace aris
{
    struct BeamformingOptions
    {
        double eps1 = 1e-6;      // relative change of lambda
        int max_iter = 50;
        double alpha_max = 4.0;
        int grid = 64;           // grid points per axis for the inner search
        double refine_tol = 1e-7;
    };

    struct BeamformingResult
    {
        Beamformer f;
        double ratio = 0.0;              // scale * SAR / gain at f
        std::vector<double> lambda_trace; // lambda after each iteration, starting with the initial one
        int iterations = 0;
        bool converged = false;
    };

    // delta * (scale * SAR(alpha, beta) - lambda * gain(alpha, beta; K)),
    // scale = noise * (2^(rate / w) - 1)
    double dinkelbach_objective(const Beamformer &f, double lambda, const CMatrix &k, const SarModel &model, double scale,
                                double delta = 1.0);

    double rate_scale(double rate, double noise, double bandwidth);

    class BeamformingSolver
    {
    public:
        explicit BeamformingSolver(const SarModel &model, BeamformingOptions opts = {});

        // argmin over alpha2 in [0, alpha_max], beta2 in [0, 2 pi) of scale * SAR - lambda * gain
        Beamformer solve_inner(double lambda, const CMatrix &k, double scale = 1.0) const;

        // Starts from the better of `init` and the best grid point of the ratio.
        BeamformingResult optimize(const CMatrix &k, double scale = 1.0, const Beamformer &init = Beamformer{}) const;

        double sar(double alpha2, double beta2) const { return reference_sar(model_, 1.0, alpha2, beta2); }

        const SarModel &model() const { return model_; }
        const BeamformingOptions &options() const { return opts_; }

    private:
        struct Candidate
        {
            double alpha2, beta2, value;
        };

        void grid_gains(const CMatrix &k, std::vector<double> &gains) const;
        Candidate refine(Candidate start, double lambda, const CMatrix &k, double scale) const;

        SarModel model_;
        BeamformingOptions opts_;
        std::vector<double> alphas_, betas_, sar_table_; // sar_table_[j * grid + i] for (alpha_i, beta_j)
    };
}

#endif
