// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo sweeps over paired channel realizations, empirical CDFs and
// plot-data export.

#ifndef ARIS_HARNESS_HPP
#define ARIS_HARNESS_HPP

#include "aris/orchestrator.hpp"
#include "aris/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace aris
{
    enum class SweepParam
    {
        rx_antennas,
        ris_elements,
        noise_psd // values in dBm/Hz
    };

    // Accepts mr|n|noise and the long names rx_antennas|num_ris_elements|noise_psd.
    SweepParam parse_sweep_param(const std::string &name);
    std::string sweep_param_name(SweepParam p);

    // Copy of `base` with the swept parameter set to `value`.
    Scenario apply_sweep_value(const Scenario &base, SweepParam param, double value);

    struct SweepSpec
    {
        SweepParam param = SweepParam::rx_antennas;
        std::vector<double> values;
        int trials = 1;
        std::vector<Scheme> schemes{Scheme::proposed};
        Scenario base;
        AoOptions ao{};
        int threads = 0; // 0 = hardware concurrency

        // Throws ConfigError on an empty or non-increasing value list or trials < 1.
        void validate() const;
    };

    struct TrialRecord
    {
        int point = 0; // index into values
        int trial = 0;
        Scheme scheme = Scheme::proposed;
        bool failed = false;
        std::string error;
        double exposure_index = 0.0;    // W/kg
        double max_user_exposure = 0.0; // W/kg
        std::uint64_t channel_hash = 0;
    };

    struct PointSummary
    {
        double value = 0.0;
        Scheme scheme = Scheme::proposed;
        double mean = 0.0;
        double stderr_ = 0.0;
        int count = 0;
        int failures = 0;
        bool flagged = false; // more than 10% of trials failed
    };

    struct SweepResult
    {
        SweepSpec spec;
        std::vector<TrialRecord> trials; // sorted by (point, trial, scheme order)
        std::vector<PointSummary> points;

        const PointSummary &summary(int point, Scheme scheme) const;
        // Per-trial exposure index of one scheme at one point (failed trials omitted).
        std::vector<double> samples(int point, Scheme scheme) const;
        const TrialRecord *record(int point, int trial, Scheme scheme) const;
    };

    SweepResult monte_carlo_sweep(const SweepSpec &spec);

    // Sorted (value, k / n) pairs; throws std::invalid_argument on empty input.
    std::vector<std::pair<double, double>> exposure_cdf(std::vector<double> samples);

    struct Table
    {
        std::vector<std::string> header;
        std::vector<std::vector<std::string>> rows;
    };

    enum class TableFormat
    {
        csv,
        dat
    };

    std::string format_number(double v); // shortest round-trip form

    Table sweep_table(const SweepResult &r);
    Table xy_table(const std::vector<std::pair<double, double>> &points, const std::string &x = "x",
                   const std::string &y = "y");
    Table trajectory_table(const std::vector<Vec3> &q);

    // csv: header row, RFC 4180 quoting. dat: "x y" rows without header, exactly two columns.
    void write_table(std::ostream &out, const Table &t, TableFormat format);
    void export_table(const Table &t, TableFormat format, const std::string &path);
    Table read_csv(std::istream &in);
}

#endif
