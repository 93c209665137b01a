// SPDX-License-Identifier: Apache-2.0
//
// Reference SAR polynomial for a two-antenna handset, per-user exposure,
// the network exposure index, and the rate / power relations of one RE.

#ifndef ARIS_EXPOSURE_HPP
#define ARIS_EXPOSURE_HPP

#include "aris/types.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace aris
{
    // Fitted coefficients b_1..b_20 of the reference-SAR polynomial (stored 0-based).
    struct SarModel
    {
        std::array<double, 20> b{};

        // Positive, phase-sensitive model shipped as the default. The published
        // fit is not available, so absolute SAR numbers are illustrative only.
        static SarModel synthetic_default();

        // Throws ConfigError unless reference_sar > 0 on a 64x64 grid of
        // alpha_2 in [0, 4] and beta_2 in [0, 2*pi).
        void validate() const;

        bool operator==(const SarModel &) const = default;
    };

    // Reads 20 whitespace-separated reals; validates positivity.
    SarModel read_sar_model(std::istream &in);
    SarModel load_sar_model(const std::string &path);

    // SAR at unit transmit power [1/kg] for relative power shares (alpha1, alpha2)
    // and antenna-2 phase offset beta2.
    double reference_sar(const SarModel &model, double alpha1, double alpha2, double beta2);

    // SAR versus main-lobe direction phi [deg] using the 2-element ULA steering phase
    // beta2 = -2*pi*spacing*sin(phi).
    double sar_vs_lobe_angle(const SarModel &model, double phi_deg, double spacing = 0.5, double alpha2 = 1.0);

    // w * delta * log2(1 + p*gain/noise) [bit/s]
    double achievable_rate(double delta, double power, double gain, double bandwidth, double noise);

    // Inverse of achievable_rate with delta = 1: (2^(r/w) - 1) * noise / gain.
    // Throws InfeasibleError for gain <= 0 with a positive rate.
    double min_power_for_rate(double rate, double gain, double noise, double bandwidth);

    // Sum over REs of delta * p * SAR [W/kg]
    double user_exposure(std::span<const double> delta, std::span<const double> power, std::span<const double> sar);

    // (Delta / (N_T * U)) * sum of per-user per-slot exposures; `exposure` is
    // indexed [slot][user].
    double exposure_index(const std::vector<std::vector<double>> &exposure, double slot_duration);

    struct ExposureReport
    {
        std::string label;
        std::vector<std::vector<double>> per_user_exposure; // [slot][user], W/kg
        std::vector<double> achieved_rates;                 // worst slot per user, bit/s
        double exposure_index = 0.0;                        // W/kg

        // Max over users of the user's time-averaged exposure (Delta/N_T * sum_l E_u[l])
        double max_user_exposure(double slot_duration) const;
    };
}

#endif
