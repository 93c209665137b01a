// SPDX-License-Identifier: Apache-2.0
//
// Per-user power split over assigned REs minimizing sum SAR * p subject to the
// rate target and the power budget.

#ifndef ARIS_POWER_CONTROL_HPP
#define ARIS_POWER_CONTROL_HPP

#include <vector>

namespace aris
{
    // One assigned RE of a user
    struct PowerLink
    {
        double gain = 0.0; // gamma
        double sar = 0.0;  // reference SAR
    };

    struct PowerProblem
    {
        std::vector<PowerLink> links;
        double rate_target = 0.0; // bit/s
        double p_max = 0.0;       // W
        double noise = 0.0;       // W per RE
        double bandwidth = 0.0;   // Hz per RE
    };

    struct PowerAllocation
    {
        std::vector<double> power;      // per link, W
        std::vector<double> rate_share; // per link, bit/s
        double mu = 0.0;
        double lambda = 0.0;
        bool cap_active = false;
        bool newton_fallback = false; // bisection was needed after Newton failed
    };

    // max(w mu / (ln2 (sar + lambda)) - noise / gain, 0), zero when delta = 0
    double optimal_power_formula(double mu, double lambda, double sar, double gain, double noise, double bandwidth,
                                 double delta = 1.0);

    // Smallest total power reaching the rate target (water-filling on gain / noise).
    double min_total_power(const PowerProblem &p);

    // Solves the KKT system. Throws InfeasibleError when even the power-optimal split
    // needs more than p_max.
    PowerAllocation allocate_power(const PowerProblem &p);

    double sum_rate(const PowerProblem &p, const std::vector<double> &power);
}

#endif
