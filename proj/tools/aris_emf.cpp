// SPDX-License-Identifier: Apache-2.0
//
// aris-emf: command-line driver for single runs, sweeps, trajectories and CDFs.

#include "aris/harness.hpp"
#include "aris/orchestrator.hpp"
#include "aris/scenario.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace
{
    using namespace aris;

    Scenario load(const std::string &path, const std::uint64_t *seed)
    {
        Scenario s = load_scenario(path);
        if (seed)
        {
            s.rng_seed = *seed;
            resample_users(s, 0);
        }
        return s;
    }

    std::vector<double> parse_values(const std::string &text)
    {
        std::vector<double> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
        {
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(item, &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used == 0 || used != item.size())
                throw ConfigError("--values: '" + item + "' is not a number");
            out.push_back(v);
        }
        return out;
    }

    std::vector<Scheme> parse_schemes(const std::string &text)
    {
        std::vector<Scheme> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(parse_scheme(item));
        if (out.empty())
            throw ConfigError("--schemes: empty list");
        return out;
    }

    std::string out_path(const std::string &dir, const std::string &name)
    {
        std::filesystem::create_directories(dir);
        return (std::filesystem::path(dir) / name).string();
    }

    void emit(const Table &t, TableFormat f, const std::string &dir, const std::string &name)
    {
        if (dir.empty())
            write_table(std::cout, t, f);
        else
            export_table(t, f, out_path(dir, name));
    }

    void print_summary(const Scenario &s, const SchemeResult &r)
    {
        std::printf("scheme            %s\n", r.report.label.c_str());
        std::printf("exposure index    %.6e W/kg (%.6f mW/kg)\n", r.report.exposure_index,
                    1e3 * r.report.exposure_index);
        std::printf("max user exposure %.6e W/kg\n", r.report.max_user_exposure(s.params.slot_duration));
        std::printf("outer iterations  %d (%s)\n", r.trace.outer_iterations,
                    r.trace.converged ? "converged" : "iteration cap");
        std::printf("sdp solves        %ld\n", r.trace.counters.sdp_solves);
        std::printf("sca iterations    %ld\n", r.trace.counters.sca_iterations);
        for (std::size_t u = 0; u < r.report.achieved_rates.size(); ++u)
            std::printf("user %-3zu rate     %.6e bit/s (target %.6e)\n", u, r.report.achieved_rates[u],
                        s.rate_targets[u]);
        for (const auto &w : r.trace.warnings)
            std::printf("warning: %s\n", w.c_str());
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"EMF-exposure minimization for ARIS-assisted uplink MU-MIMO"};
    app.require_subcommand(1);

    std::string config, out_dir, param, values, schemes = "proposed,fixed,random,zero,no-ris", scheme = "proposed";
    std::uint64_t seed = 0;
    int trials = 1, threads = 0, max_outer = 10;

    auto *opt = app.add_subcommand("optimize", "Run one scheme on trial 0 of a scenario");
    opt->add_option("--config", config, "Scenario config file")->required();
    auto *opt_seed = opt->add_option("--seed", seed, "Override the master seed");
    opt->add_option("--out", out_dir, "Directory for report.csv, trajectory.dat and trace.csv");
    opt->add_option("--scheme", scheme, "proposed|direct|fixed|random|zero|no-ris");
    opt->add_option("--max-outer", max_outer, "Outer iteration cap")->check(CLI::PositiveNumber);

    auto *sw = app.add_subcommand("sweep", "Monte Carlo sweep over one parameter");
    sw->add_option("--config", config, "Scenario config file")->required();
    sw->add_option("--param", param, "mr|n|noise")->required();
    sw->add_option("--values", values, "Comma-separated, strictly increasing")->required();
    sw->add_option("--trials", trials, "Trials per point")->check(CLI::PositiveNumber);
    sw->add_option("--schemes", schemes, "Comma-separated scheme list");
    auto *sw_seed = sw->add_option("--seed", seed, "Override the master seed");
    sw->add_option("--threads", threads, "Worker threads (0 = all cores)");
    sw->add_option("--out", out_dir, "Directory for sweep.csv and per-scheme .dat files");
    sw->add_option("--max-outer", max_outer, "Outer iteration cap")->check(CLI::PositiveNumber);

    auto *tr = app.add_subcommand("trajectory", "Paths of the optimized, direct and fixed schemes");
    tr->add_option("--config", config, "Scenario config file")->required();
    auto *tr_seed = tr->add_option("--seed", seed, "Override the master seed");
    tr->add_option("--out", out_dir, "Directory for trajectory_<scheme>.dat");
    tr->add_option("--max-outer", max_outer, "Outer iteration cap")->check(CLI::PositiveNumber);

    auto *cdf = app.add_subcommand("cdf", "CDFs of maximum and mean exposure with and without ARIS");
    cdf->add_option("--config", config, "Scenario config file")->required();
    cdf->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
    auto *cdf_seed = cdf->add_option("--seed", seed, "Override the master seed");
    cdf->add_option("--threads", threads, "Worker threads (0 = all cores)");
    cdf->add_option("--out", out_dir, "Directory for cdf_*.dat");
    cdf->add_option("--max-outer", max_outer, "Outer iteration cap")->check(CLI::PositiveNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return 1;
    }

    try
    {
        AoOptions ao;
        ao.max_outer = max_outer;
        if (opt->parsed())
        {
            const Scenario s = load(config, opt_seed->count() ? &seed : nullptr);
            const ChannelRealization ch(s, 0);
            const SchemeResult r = run_scheme(s, ch, 0, parse_scheme(scheme), ao);
            print_summary(s, r);
            if (!out_dir.empty())
            {
                Table rep;
                rep.header = {"slot", "user", "exposure"};
                for (std::size_t l = 0; l < r.report.per_user_exposure.size(); ++l)
                    for (std::size_t u = 0; u < r.report.per_user_exposure[l].size(); ++u)
                        rep.rows.push_back({std::to_string(l), std::to_string(u),
                                            format_number(r.report.per_user_exposure[l][u])});
                export_table(rep, TableFormat::csv, out_path(out_dir, "report.csv"));
                export_table(trajectory_table(r.state.trajectory), TableFormat::dat,
                             out_path(out_dir, "trajectory.dat"));
                std::vector<std::pair<double, double>> trace;
                for (std::size_t i = 0; i < r.trace.index_trace.size(); ++i)
                    trace.emplace_back(static_cast<double>(i), r.trace.index_trace[i]);
                export_table(xy_table(trace, "iteration", "exposure_index"), TableFormat::csv,
                             out_path(out_dir, "trace.csv"));
            }
        }
        else if (sw->parsed())
        {
            SweepSpec spec;
            spec.base = load(config, sw_seed->count() ? &seed : nullptr);
            spec.param = parse_sweep_param(param);
            spec.values = parse_values(values);
            spec.trials = trials;
            spec.schemes = parse_schemes(schemes);
            spec.threads = threads;
            spec.ao = ao;
            const SweepResult r = monte_carlo_sweep(spec);
            emit(sweep_table(r), TableFormat::csv, out_dir, "sweep.csv");
            if (!out_dir.empty())
                for (Scheme sc : spec.schemes)
                {
                    std::vector<std::pair<double, double>> pts;
                    for (std::size_t i = 0; i < spec.values.size(); ++i)
                        pts.emplace_back(spec.values[i], r.summary(static_cast<int>(i), sc).mean);
                    export_table(xy_table(pts), TableFormat::dat, out_path(out_dir, "sweep_" + scheme_name(sc) + ".dat"));
                }
            for (const auto &p : r.points)
                if (p.flagged)
                    std::fprintf(stderr, "warning: %s at %s: %d of %d trials failed\n", scheme_name(p.scheme).c_str(),
                                 format_number(p.value).c_str(), p.failures, spec.trials);
        }
        else if (tr->parsed())
        {
            const Scenario s = load(config, tr_seed->count() ? &seed : nullptr);
            const ChannelRealization ch(s, 0);
            for (Scheme sc : {Scheme::proposed, Scheme::direct, Scheme::fixed})
            {
                const SchemeResult r = run_scheme(s, ch, 0, sc, ao);
                const std::string name = sc == Scheme::proposed ? "optimized" : scheme_name(sc);
                if (out_dir.empty())
                    std::cout << "# " << name << " I=" << format_number(r.report.exposure_index) << "\n";
                emit(trajectory_table(r.state.trajectory), TableFormat::dat, out_dir, "trajectory_" + name + ".dat");
            }
        }
        else if (cdf->parsed())
        {
            SweepSpec spec;
            spec.base = load(config, cdf_seed->count() ? &seed : nullptr);
            spec.param = SweepParam::rx_antennas;
            spec.values = {static_cast<double>(spec.base.params.rx_antennas)};
            spec.trials = trials;
            spec.schemes = {Scheme::proposed, Scheme::no_ris};
            spec.threads = threads;
            spec.ao = ao;
            const SweepResult r = monte_carlo_sweep(spec);
            for (Scheme sc : spec.schemes)
            {
                std::vector<double> max_e, mean_e;
                for (const auto &t : r.trials)
                    if (t.scheme == sc && !t.failed)
                    {
                        max_e.push_back(t.max_user_exposure);
                        mean_e.push_back(t.exposure_index);
                    }
                if (max_e.empty())
                    throw InfeasibleError("cdf: every trial failed for " + scheme_name(sc));
                const std::string tag = sc == Scheme::proposed ? "ris" : "no_ris";
                if (out_dir.empty())
                    std::cout << "# max exposure, " << tag << "\n";
                emit(xy_table(exposure_cdf(max_e)), TableFormat::dat, out_dir, "cdf_max_" + tag + ".dat");
                if (out_dir.empty())
                    std::cout << "# mean exposure, " << tag << "\n";
                emit(xy_table(exposure_cdf(mean_e)), TableFormat::dat, out_dir, "cdf_mean_" + tag + ".dat");
            }
        }
    }
    catch (const InfeasibleError &e)
    {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return 2;
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
