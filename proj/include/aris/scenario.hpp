// SPDX-License-Identifier: Apache-2.0
//
// System parameters, node geometry, and scenario configuration I/O.
// Everything is stored in SI units; dB quantities only exist in config files.

#ifndef ARIS_SCENARIO_HPP
#define ARIS_SCENARIO_HPP

#include "aris/config.hpp"
#include "aris/exposure.hpp"
#include "aris/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace aris
{
    struct SystemParams
    {
        int num_users = 8;
        int num_subcarriers = 80;
        int num_ris_elements = 80;
        int rx_antennas = 32;
        int tx_antennas = 2;
        double bs_height = 25.0;            // m
        double aris_height = 100.0;         // m
        double slot_duration = 15.0;        // s
        double flight_time = 300.0;         // s
        int num_slots = 20;
        double v_max = 25.0;                // m/s
        double bandwidth_per_re = 240e3;    // Hz
        double los_pathloss_ref = 0.0;      // linear, set in constructor
        double nlos_pathloss_ref = 0.0;     // linear
        double p_max = 0.0;                 // W
        double noise_psd = 0.0;             // W/Hz
        double carrier_freq = 700e6;        // Hz
        double direct_pathloss_exp = 3.908;
        double rician_k1 = 0.0;             // linear
        double rician_k2 = 0.0;             // linear
        double ris_pathloss_exp1 = 2.2;
        double ris_pathloss_exp2 = 2.2;
        double antenna_spacing_ratio = 0.5;
        bool departure_uses_x = false;

        SystemParams();

        double max_step() const { return slot_duration * v_max; }
        double noise_power() const { return noise_psd * bandwidth_per_re; }

        bool operator==(const SystemParams &) const = default;
    };

    struct Scenario
    {
        SystemParams params;
        Vec3 bs_position{0.0, 0.0, 25.0};
        std::vector<Vec3> user_positions;
        std::vector<double> rate_targets; // bit/s
        Vec3 aris_start{-80.0, 55.0, 100.0};
        Vec3 aris_end{100.0, 20.0, 100.0};
        double cell_radius = 100.0;
        SarModel sar_model = SarModel::synthetic_default();
        std::uint64_t rng_seed = 1;
        bool users_fixed = false; // positions came from the config, not from sampling

        // Throws ConfigError naming the first violated invariant.
        void validate() const;

        bool operator==(const Scenario &) const = default;
    };

    // Full-scale defaults with users sampled from the seed.
    Scenario default_scenario(std::uint64_t seed = 1);

    Scenario scenario_from_config(const ConfigDocument &doc);
    Scenario read_scenario(std::istream &in);
    Scenario load_scenario(const std::string &path);

    // Writes a config that loads back to an identical Scenario.
    void write_scenario(std::ostream &out, const Scenario &s);

    double dbm_to_watts(double dbm);
    double watts_to_dbm(double watts);
    double db_to_linear(double db);
    double linear_to_db(double lin);

    // psd in dBm/Hz, result in W
    double noise_power(double psd_dbm_per_hz, double bandwidth);

    // Uniform over the disk of the given radius at z = 0.
    std::vector<Vec3> sample_user_positions(Rng &rng, double radius, int count);

    // Redraws user positions for a Monte Carlo trial unless they are pinned by the config.
    void resample_users(Scenario &s, std::uint64_t trial);

    // Rate targets used when a U = 8 config does not list any, bit/s.
    std::vector<double> default_rate_targets();
}

#endif
