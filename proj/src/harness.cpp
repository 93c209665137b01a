// SPDX-License-Identifier: Apache-2.0

#include "aris/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace aris
{
    SweepParam parse_sweep_param(const std::string &name)
    {
        if (name == "mr" || name == "rx_antennas")
            return SweepParam::rx_antennas;
        if (name == "n" || name == "num_ris_elements")
            return SweepParam::ris_elements;
        if (name == "noise" || name == "noise_psd")
            return SweepParam::noise_psd;
        throw ConfigError("unknown sweep parameter '" + name + "' (expected mr, n or noise)");
    }

    std::string sweep_param_name(SweepParam p)
    {
        switch (p)
        {
        case SweepParam::rx_antennas:
            return "rx_antennas";
        case SweepParam::ris_elements:
            return "num_ris_elements";
        case SweepParam::noise_psd:
            return "noise_psd";
        }
        return "unknown";
    }

    Scenario apply_sweep_value(const Scenario &base, SweepParam param, double value)
    {
        Scenario s = base;
        auto count = [&](const char *what)
        {
            if (!(value >= 1.0) || value != std::floor(value) || value > 1e6)
                throw ConfigError(std::string("sweep: ") + what + " values must be positive integers");
            return static_cast<int>(value);
        };
        switch (param)
        {
        case SweepParam::rx_antennas:
            s.params.rx_antennas = count("rx_antennas");
            break;
        case SweepParam::ris_elements:
            s.params.num_ris_elements = count("num_ris_elements");
            break;
        case SweepParam::noise_psd:
            if (!std::isfinite(value))
                throw ConfigError("sweep: noise_psd values must be finite (dBm/Hz)");
            s.params.noise_psd = dbm_to_watts(value);
            break;
        }
        s.validate();
        return s;
    }

    void SweepSpec::validate() const
    {
        if (values.empty())
            throw ConfigError("sweep: value list is empty");
        for (std::size_t i = 1; i < values.size(); ++i)
            if (!(values[i] > values[i - 1]))
                throw ConfigError("sweep: values must be strictly increasing");
        if (trials < 1)
            throw ConfigError("sweep: trials must be >= 1");
        if (schemes.empty())
            throw ConfigError("sweep: no schemes selected");
        base.validate();
    }

    const PointSummary &SweepResult::summary(int point, Scheme scheme) const
    {
        for (const auto &p : points)
            if (p.value == spec.values.at(point) && p.scheme == scheme)
                return p;
        throw std::out_of_range("SweepResult: no such point");
    }

    std::vector<double> SweepResult::samples(int point, Scheme scheme) const
    {
        std::vector<double> out;
        for (const auto &t : trials)
            if (t.point == point && t.scheme == scheme && !t.failed)
                out.push_back(t.exposure_index);
        return out;
    }

    const TrialRecord *SweepResult::record(int point, int trial, Scheme scheme) const
    {
        for (const auto &t : trials)
            if (t.point == point && t.trial == trial && t.scheme == scheme)
                return &t;
        return nullptr;
    }

    SweepResult monte_carlo_sweep(const SweepSpec &spec)
    {
        spec.validate();
        SweepResult out;
        out.spec = spec;
        const int points = static_cast<int>(spec.values.size());
        const int schemes = static_cast<int>(spec.schemes.size());
        std::vector<Scenario> scenarios;
        for (double v : spec.values)
            scenarios.push_back(apply_sweep_value(spec.base, spec.param, v));

        const std::size_t jobs = static_cast<std::size_t>(points) * spec.trials;
        out.trials.resize(jobs * schemes);
        std::atomic<std::size_t> next{0};
        auto worker = [&]
        {
            for (std::size_t job = next++; job < jobs; job = next++)
            {
                const int point = static_cast<int>(job / spec.trials);
                const int trial = static_cast<int>(job % spec.trials);
                Scenario s = scenarios[point];
                resample_users(s, static_cast<std::uint64_t>(trial));
                const ChannelRealization ch(s, static_cast<std::uint64_t>(trial));
                const std::uint64_t hash = ch.fingerprint();
                for (int k = 0; k < schemes; ++k)
                {
                    TrialRecord &rec = out.trials[job * schemes + k];
                    rec.point = point;
                    rec.trial = trial;
                    rec.scheme = spec.schemes[k];
                    rec.channel_hash = hash;
                    try
                    {
                        const SchemeResult r = run_scheme(s, ch, static_cast<std::uint64_t>(trial), rec.scheme, spec.ao);
                        rec.exposure_index = r.report.exposure_index;
                        rec.max_user_exposure = r.report.max_user_exposure(s.params.slot_duration);
                    }
                    catch (const std::exception &e)
                    {
                        rec.failed = true;
                        rec.error = e.what();
                    }
                }
            }
        };
        int threads = spec.threads > 0 ? spec.threads : static_cast<int>(std::thread::hardware_concurrency());
        threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(jobs, 1)));
        if (threads == 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (int i = 0; i < threads; ++i)
                pool.emplace_back(worker);
            for (auto &t : pool)
                t.join();
        }

        for (int point = 0; point < points; ++point)
            for (int k = 0; k < schemes; ++k)
            {
                PointSummary ps;
                ps.value = spec.values[point];
                ps.scheme = spec.schemes[k];
                std::vector<double> xs;
                for (int trial = 0; trial < spec.trials; ++trial)
                {
                    const TrialRecord &rec = out.trials[(static_cast<std::size_t>(point) * spec.trials + trial) * schemes + k];
                    if (rec.failed)
                        ++ps.failures;
                    else
                        xs.push_back(rec.exposure_index);
                }
                ps.count = static_cast<int>(xs.size());
                if (!xs.empty())
                {
                    double sum = 0.0;
                    for (double x : xs)
                        sum += x;
                    ps.mean = sum / xs.size();
                    if (xs.size() > 1)
                    {
                        double ss = 0.0;
                        for (double x : xs)
                            ss += (x - ps.mean) * (x - ps.mean);
                        ps.stderr_ = std::sqrt(ss / (xs.size() - 1) / xs.size());
                    }
                }
                ps.flagged = ps.failures * 10 > spec.trials;
                out.points.push_back(ps);
            }
        return out;
    }

    std::vector<std::pair<double, double>> exposure_cdf(std::vector<double> samples)
    {
        if (samples.empty())
            throw std::invalid_argument("exposure_cdf: no samples");
        std::sort(samples.begin(), samples.end());
        std::vector<std::pair<double, double>> out;
        const double n = static_cast<double>(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k)
            out.emplace_back(samples[k], static_cast<double>(k + 1) / n);
        return out;
    }

    std::string format_number(double v)
    {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }

    Table sweep_table(const SweepResult &r)
    {
        Table t;
        t.header = {"param", "value", "scheme", "mean_index", "stderr", "trials", "failures", "flagged"};
        const std::string param = sweep_param_name(r.spec.param);
        for (const auto &p : r.points)
            t.rows.push_back({param, format_number(p.value), scheme_name(p.scheme), format_number(p.mean),
                              format_number(p.stderr_), std::to_string(p.count), std::to_string(p.failures),
                              p.flagged ? "1" : "0"});
        return t;
    }

    Table xy_table(const std::vector<std::pair<double, double>> &points, const std::string &x, const std::string &y)
    {
        Table t;
        t.header = {x, y};
        for (const auto &[a, b] : points)
            t.rows.push_back({format_number(a), format_number(b)});
        return t;
    }

    Table trajectory_table(const std::vector<Vec3> &q)
    {
        std::vector<std::pair<double, double>> pts;
        for (const auto &p : q)
            pts.emplace_back(p.x(), p.y());
        return xy_table(pts);
    }

    namespace
    {
        std::string csv_field(const std::string &s)
        {
            if (s.find_first_of(",\"\r\n") == std::string::npos)
                return s;
            std::string out = "\"";
            for (char c : s)
            {
                if (c == '"')
                    out += '"';
                out += c;
            }
            return out + "\"";
        }

        void csv_row(std::ostream &out, const std::vector<std::string> &row)
        {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "," : "") << csv_field(row[i]);
            out << "\r\n";
        }
    }

    void write_table(std::ostream &out, const Table &t, TableFormat format)
    {
        if (format == TableFormat::csv)
        {
            csv_row(out, t.header);
            for (const auto &r : t.rows)
            {
                if (r.size() != t.header.size())
                    throw std::invalid_argument("write_table: row width does not match the header");
                csv_row(out, r);
            }
            return;
        }
        for (const auto &r : t.rows)
        {
            if (r.size() != 2)
                throw std::invalid_argument("write_table: dat output needs exactly two columns");
            out << r[0] << ' ' << r[1] << '\n';
        }
    }

    void export_table(const Table &t, TableFormat format, const std::string &path)
    {
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw std::runtime_error("export_table: cannot open " + path);
        write_table(f, t, format);
        f.flush();
        if (!f)
            throw std::runtime_error("export_table: write failed for " + path);
    }

    Table read_csv(std::istream &in)
    {
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> row;
        std::string field;
        bool quoted = false, any = false;
        char c;
        while (in.get(c))
        {
            any = true;
            if (quoted)
            {
                if (c == '"')
                {
                    if (in.peek() == '"')
                    {
                        in.get(c);
                        field += '"';
                    }
                    else
                        quoted = false;
                }
                else
                    field += c;
            }
            else if (c == '"')
                quoted = true;
            else if (c == ',')
            {
                row.push_back(field);
                field.clear();
            }
            else if (c == '\r')
                continue;
            else if (c == '\n')
            {
                row.push_back(field);
                field.clear();
                rows.push_back(std::move(row));
                row.clear();
                any = false;
            }
            else
                field += c;
        }
        if (quoted)
            throw std::runtime_error("read_csv: unterminated quoted field");
        if (any)
        {
            row.push_back(field);
            rows.push_back(std::move(row));
        }
        Table t;
        if (rows.empty())
            return t;
        t.header = rows.front();
        t.rows.assign(rows.begin() + 1, rows.end());
        return t;
    }
}
