// SPDX-License-Identifier: Apache-2.0

#include "aris/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace aris
{
    double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
    double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
    double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

    double noise_power(double psd_dbm_per_hz, double bandwidth)
    {
        return dbm_to_watts(psd_dbm_per_hz + 10.0 * std::log10(bandwidth));
    }

    SystemParams::SystemParams()
        : los_pathloss_ref(db_to_linear(-24.91)),
          nlos_pathloss_ref(db_to_linear(-19.96)),
          p_max(dbm_to_watts(26.0)),
          noise_psd(dbm_to_watts(-174.0)),
          rician_k1(db_to_linear(3.0)),
          rician_k2(db_to_linear(3.0))
    {
    }

    std::vector<double> default_rate_targets()
    {
        return {10e6, 9.4e6, 8.5e6, 6.7e6, 4.5e6, 7.6e6, 8.7e6, 3.1e6};
    }

    std::vector<Vec3> sample_user_positions(Rng &rng, double radius, int count)
    {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::vector<Vec3> out;
        out.reserve(count > 0 ? count : 0);
        for (int i = 0; i < count; ++i)
        {
            const double r = radius * std::sqrt(uni(rng));
            const double phi = 2.0 * pi * uni(rng);
            out.emplace_back(r * std::cos(phi), r * std::sin(phi), 0.0);
        }
        return out;
    }

    void resample_users(Scenario &s, std::uint64_t trial)
    {
        if (s.users_fixed)
            return;
        Rng rng(derive_seed(s.rng_seed, trial, tag(StreamTag::users)));
        s.user_positions = sample_user_positions(rng, s.cell_radius, s.params.num_users);
    }

    Scenario default_scenario(std::uint64_t seed)
    {
        Scenario s;
        s.rng_seed = seed;
        s.rate_targets = default_rate_targets();
        resample_users(s, 0);
        return s;
    }

    void Scenario::validate() const
    {
        const auto &p = params;
        auto require = [](bool ok, const std::string &what)
        {
            if (!ok)
                throw ConfigError("invalid scenario: " + what);
        };
        require(p.num_users >= 0, "num_users must be >= 0");
        require(p.num_subcarriers >= 1, "num_subcarriers must be >= 1");
        require(p.num_ris_elements >= 1, "num_ris_elements must be >= 1");
        require(p.rx_antennas >= 1, "rx_antennas must be >= 1");
        require(p.tx_antennas == 2, "tx_antennas must be 2 (two-antenna SAR model)");
        require(p.num_slots >= 1, "num_slots must be >= 1");
        require(p.num_subcarriers >= p.num_users, "num_subcarriers must be >= num_users");
        for (auto [v, name] : {std::pair{p.bs_height, "bs_height"}, {p.aris_height, "aris_height"},
                               {p.slot_duration, "slot_duration"}, {p.flight_time, "flight_time"},
                               {p.v_max, "v_max"}, {p.bandwidth_per_re, "bandwidth_per_re"},
                               {p.los_pathloss_ref, "los_pathloss_ref"}, {p.nlos_pathloss_ref, "nlos_pathloss_ref"},
                               {p.p_max, "p_max"}, {p.noise_psd, "noise_psd"}, {p.carrier_freq, "carrier_freq"},
                               {p.direct_pathloss_exp, "direct_pathloss_exp"}, {p.rician_k1, "rician_factors[0]"},
                               {p.rician_k2, "rician_factors[1]"}, {p.ris_pathloss_exp1, "ris_pathloss_exps[0]"},
                               {p.ris_pathloss_exp2, "ris_pathloss_exps[1]"},
                               {p.antenna_spacing_ratio, "antenna_spacing_ratio"}, {cell_radius, "users.radius"}})
        {
            require(std::isfinite(v) && v > 0.0, std::string(name) + " must be positive");
        }
        const double ratio = p.flight_time / p.slot_duration;
        require(std::abs(ratio - std::round(ratio)) <= 1e-9 * ratio,
                "slot_duration must divide flight_time");
        require(static_cast<int>(std::lround(ratio)) == p.num_slots, "num_slots must equal flight_time / slot_duration");
        require(static_cast<int>(user_positions.size()) == p.num_users, "users.positions must list num_users points");
        require(static_cast<int>(rate_targets.size()) == p.num_users, "rates must list num_users values");
        for (double r : rate_targets)
            require(std::isfinite(r) && r > 0.0, "rate targets must be positive");
        for (const auto &u : user_positions)
        {
            require(u.z() == 0.0, "users must be at ground level (z = 0)");
            require(std::hypot(u.x(), u.y()) <= cell_radius * (1.0 + 1e-12), "users must lie inside users.radius");
        }
        require(bs_position.z() == p.bs_height, "base station height must equal bs_height");
        require(aris_start.z() == p.aris_height && aris_end.z() == p.aris_height,
                "aris.start and aris.end must be at aris_height");
        const double direct = (aris_end - aris_start).norm();
        require(direct <= p.max_step() * (p.num_slots - 1) + 1e-9,
                "aris.end is not reachable from aris.start within flight_time at v_max");
        sar_model.validate();
    }

    namespace
    {
        enum class Quantity
        {
            count,
            plain,      // unitless or SI scalar
            seconds,
            meters,
            speed,
            frequency,
            gain_db,    // dB by default, "lin" for linear
            power_dbm,  // dBm by default, W / mW allowed
            psd_dbm_hz, // dBm/Hz by default, W/Hz allowed
            rate        // bit/s by default, kbps / Mbps allowed
        };

        [[noreturn]] void bad(const ConfigValue &v, const std::string &what)
        {
            throw ConfigError("line " + std::to_string(v.line) + ": " + what);
        }

        double to_si(const ConfigValue &v, Quantity q, const std::string &key)
        {
            if (v.kind != ConfigValue::Kind::number)
                bad(v, "'" + key + "' expects a number");
            const double x = v.number;
            const std::string &u = v.unit;
            auto unit_error = [&]() -> double
            {
                bad(v, "unit '" + u + "' not allowed for '" + key + "'");
                return 0.0;
            };
            switch (q)
            {
            case Quantity::count:
                if (!u.empty() || x != std::floor(x))
                    bad(v, "'" + key + "' expects an integer");
                return x;
            case Quantity::plain:
                if (!u.empty())
                    return unit_error();
                return x;
            case Quantity::seconds:
                if (u.empty() || u == "s")
                    return x;
                return unit_error();
            case Quantity::meters:
                if (u.empty() || u == "m")
                    return x;
                return unit_error();
            case Quantity::speed:
                if (u.empty() || u == "m/s")
                    return x;
                return unit_error();
            case Quantity::frequency:
                if (u.empty() || u == "Hz")
                    return x;
                if (u == "kHz")
                    return x * 1e3;
                if (u == "MHz")
                    return x * 1e6;
                if (u == "GHz")
                    return x * 1e9;
                return unit_error();
            case Quantity::gain_db:
                if (u.empty() || u == "dB")
                    return db_to_linear(x);
                if (u == "lin")
                    return x;
                return unit_error();
            case Quantity::power_dbm:
                if (u.empty() || u == "dBm")
                    return dbm_to_watts(x);
                if (u == "W")
                    return x;
                if (u == "mW")
                    return x * 1e-3;
                return unit_error();
            case Quantity::psd_dbm_hz:
                if (u.empty() || u == "dBm/Hz")
                    return dbm_to_watts(x);
                if (u == "W/Hz")
                    return x;
                return unit_error();
            case Quantity::rate:
                if (u.empty() || u == "bps")
                    return x;
                if (u == "kbps")
                    return x * 1e3;
                if (u == "Mbps")
                    return x * 1e6;
                return unit_error();
            }
            return unit_error();
        }

        std::vector<double> list_to_si(const ConfigValue &v, Quantity q, const std::string &key)
        {
            if (v.kind != ConfigValue::Kind::list)
                bad(v, "'" + key + "' expects a list");
            std::vector<double> out;
            for (const auto &item : v.items)
                out.push_back(to_si(item, q, key));
            return out;
        }

        Vec3 point(const ConfigValue &v, const std::string &key, double z)
        {
            const auto xs = list_to_si(v, Quantity::meters, key);
            if (xs.size() == 2)
                return {xs[0], xs[1], z};
            if (xs.size() == 3)
                return {xs[0], xs[1], xs[2]};
            bad(v, "'" + key + "' expects [x, y] or [x, y, z]");
        }
    }

    Scenario scenario_from_config(const ConfigDocument &doc)
    {
        Scenario s;
        SystemParams &p = s.params;
        std::set<std::string> used;

        auto number = [&](const std::string &key, Quantity q, auto &field)
        {
            if (!doc.has(key))
                return false;
            used.insert(key);
            const double x = to_si(doc.at(key), q, key);
            field = static_cast<std::remove_reference_t<decltype(field)>>(x);
            return true;
        };

        number("num_users", Quantity::count, p.num_users);
        number("num_subcarriers", Quantity::count, p.num_subcarriers);
        number("num_ris_elements", Quantity::count, p.num_ris_elements);
        number("rx_antennas", Quantity::count, p.rx_antennas);
        number("tx_antennas", Quantity::count, p.tx_antennas);
        number("bs_height", Quantity::meters, p.bs_height);
        number("aris_height", Quantity::meters, p.aris_height);
        const bool has_delta = number("slot_duration", Quantity::seconds, p.slot_duration);
        const bool has_t = number("flight_time", Quantity::seconds, p.flight_time);
        const bool has_nt = number("num_slots", Quantity::count, p.num_slots);
        number("v_max", Quantity::speed, p.v_max);
        number("bandwidth_per_re", Quantity::frequency, p.bandwidth_per_re);
        number("los_pathloss_ref", Quantity::gain_db, p.los_pathloss_ref);
        number("nlos_pathloss_ref", Quantity::gain_db, p.nlos_pathloss_ref);
        number("p_max", Quantity::power_dbm, p.p_max);
        number("noise_psd", Quantity::psd_dbm_hz, p.noise_psd);
        number("carrier_freq", Quantity::frequency, p.carrier_freq);
        number("direct_pathloss_exp", Quantity::plain, p.direct_pathloss_exp);
        number("antenna_spacing_ratio", Quantity::plain, p.antenna_spacing_ratio);
        number("users.radius", Quantity::meters, s.cell_radius);

        // keep N_T, T and Delta consistent when only some of them are given
        if (has_nt && !has_t)
            p.flight_time = p.num_slots * p.slot_duration;
        else if (!has_nt && (has_t || has_delta))
        {
            const double ratio = p.flight_time / p.slot_duration;
            if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
                throw ConfigError("invalid scenario: slot_duration must divide flight_time");
            p.num_slots = static_cast<int>(std::lround(ratio));
        }

        if (doc.has("rician_factors"))
        {
            used.insert("rician_factors");
            const auto k = list_to_si(doc.at("rician_factors"), Quantity::gain_db, "rician_factors");
            if (k.size() != 2)
                bad(doc.at("rician_factors"), "'rician_factors' expects [K1, K2]");
            p.rician_k1 = k[0];
            p.rician_k2 = k[1];
        }
        if (doc.has("ris_pathloss_exps"))
        {
            used.insert("ris_pathloss_exps");
            const auto k = list_to_si(doc.at("ris_pathloss_exps"), Quantity::plain, "ris_pathloss_exps");
            if (k.size() != 2)
                bad(doc.at("ris_pathloss_exps"), "'ris_pathloss_exps' expects [kappa1, kappa2]");
            p.ris_pathloss_exp1 = k[0];
            p.ris_pathloss_exp2 = k[1];
        }
        if (doc.has("channel.departure_uses_x"))
        {
            used.insert("channel.departure_uses_x");
            const auto &v = doc.at("channel.departure_uses_x");
            if (v.kind != ConfigValue::Kind::boolean)
                bad(v, "'channel.departure_uses_x' expects true or false");
            p.departure_uses_x = v.boolean;
        }
        if (doc.has("seed"))
        {
            used.insert("seed");
            const auto &v = doc.at("seed");
            if (v.kind != ConfigValue::Kind::number || !v.unit.empty() || v.number < 0 || v.number != std::floor(v.number))
                bad(v, "'seed' expects a non-negative integer");
            s.rng_seed = static_cast<std::uint64_t>(v.number);
        }

        s.bs_position = {0.0, 0.0, p.bs_height};
        s.aris_start = {-80.0, 55.0, p.aris_height};
        s.aris_end = {100.0, 20.0, p.aris_height};
        if (doc.has("aris.start"))
        {
            used.insert("aris.start");
            s.aris_start = point(doc.at("aris.start"), "aris.start", p.aris_height);
        }
        if (doc.has("aris.end"))
        {
            used.insert("aris.end");
            s.aris_end = point(doc.at("aris.end"), "aris.end", p.aris_height);
        }

        if (doc.has("rates"))
        {
            used.insert("rates");
            s.rate_targets = list_to_si(doc.at("rates"), Quantity::rate, "rates");
        }
        else if (p.num_users == 8)
            s.rate_targets = default_rate_targets();
        else
            throw ConfigError("invalid scenario: 'rates' is required unless num_users = 8");

        if (doc.has("sar.coefficients") && doc.has("sar.file"))
            bad(doc.at("sar.file"), "give either 'sar.coefficients' or 'sar.file', not both");
        if (doc.has("sar.coefficients"))
        {
            used.insert("sar.coefficients");
            const auto b = list_to_si(doc.at("sar.coefficients"), Quantity::plain, "sar.coefficients");
            if (b.size() != 20)
                bad(doc.at("sar.coefficients"), "'sar.coefficients' expects 20 values");
            std::copy(b.begin(), b.end(), s.sar_model.b.begin());
        }
        if (doc.has("sar.file"))
        {
            used.insert("sar.file");
            const auto &v = doc.at("sar.file");
            if (v.kind != ConfigValue::Kind::text)
                bad(v, "'sar.file' expects a quoted path");
            s.sar_model = load_sar_model(v.text);
        }

        if (doc.has("users.positions"))
        {
            used.insert("users.positions");
            const auto &v = doc.at("users.positions");
            if (v.kind != ConfigValue::Kind::list)
                bad(v, "'users.positions' expects a list of points");
            for (const auto &item : v.items)
                s.user_positions.push_back(point(item, "users.positions", 0.0));
            s.users_fixed = true;
        }
        else
            resample_users(s, 0);

        for (const auto &[key, value] : doc.entries())
        {
            if (!used.count(key))
                bad(value, "unknown key '" + key + "'");
        }
        s.validate();
        return s;
    }

    Scenario read_scenario(std::istream &in) { return scenario_from_config(ConfigDocument::parse(in)); }

    Scenario load_scenario(const std::string &path) { return scenario_from_config(ConfigDocument::parse_file(path)); }

    namespace
    {
        std::string num(double x)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", x);
            return buf;
        }

        std::string vec(const Vec3 &v) { return "[" + num(v.x()) + ", " + num(v.y()) + ", " + num(v.z()) + "]"; }
    }

    void write_scenario(std::ostream &out, const Scenario &s)
    {
        const auto &p = s.params;
        out << "num_users = " << p.num_users << "\n";
        out << "num_subcarriers = " << p.num_subcarriers << "\n";
        out << "num_ris_elements = " << p.num_ris_elements << "\n";
        out << "rx_antennas = " << p.rx_antennas << "\n";
        out << "tx_antennas = " << p.tx_antennas << "\n";
        out << "bs_height = " << num(p.bs_height) << "\n";
        out << "aris_height = " << num(p.aris_height) << "\n";
        out << "slot_duration = " << num(p.slot_duration) << "\n";
        out << "flight_time = " << num(p.flight_time) << "\n";
        out << "num_slots = " << p.num_slots << "\n";
        out << "v_max = " << num(p.v_max) << "\n";
        out << "bandwidth_per_re = " << num(p.bandwidth_per_re) << " Hz\n";
        out << "los_pathloss_ref = " << num(p.los_pathloss_ref) << " lin\n";
        out << "nlos_pathloss_ref = " << num(p.nlos_pathloss_ref) << " lin\n";
        out << "p_max = " << num(p.p_max) << " W\n";
        out << "noise_psd = " << num(p.noise_psd) << " W/Hz\n";
        out << "carrier_freq = " << num(p.carrier_freq) << " Hz\n";
        out << "direct_pathloss_exp = " << num(p.direct_pathloss_exp) << "\n";
        out << "rician_factors = [" << num(p.rician_k1) << " lin, " << num(p.rician_k2) << " lin]\n";
        out << "ris_pathloss_exps = [" << num(p.ris_pathloss_exp1) << ", " << num(p.ris_pathloss_exp2) << "]\n";
        out << "antenna_spacing_ratio = " << num(p.antenna_spacing_ratio) << "\n";
        out << "channel.departure_uses_x = " << (p.departure_uses_x ? "true" : "false") << "\n";
        out << "users.radius = " << num(s.cell_radius) << "\n";
        out << "seed = " << s.rng_seed << "\n";
        out << "aris.start = " << vec(s.aris_start) << "\n";
        out << "aris.end = " << vec(s.aris_end) << "\n";
        out << "rates = [";
        for (std::size_t i = 0; i < s.rate_targets.size(); ++i)
            out << (i ? ", " : "") << num(s.rate_targets[i]);
        out << "]\n";
        if (s.users_fixed)
        {
            out << "users.positions = [";
            for (std::size_t i = 0; i < s.user_positions.size(); ++i)
                out << (i ? ", " : "") << vec(s.user_positions[i]);
            out << "]\n";
        }
        out << "sar.coefficients = [";
        for (std::size_t i = 0; i < s.sar_model.b.size(); ++i)
            out << (i ? ", " : "") << num(s.sar_model.b[i]);
        out << "]\n";
    }
}
