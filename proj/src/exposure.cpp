// SPDX-License-Identifier: Apache-2.0

#include "aris/exposure.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace aris
{
    SarModel SarModel::synthetic_default()
    {
        SarModel m;
        // b1..b6: static and harmonic-envelope weights
        m.b[0] = 4.0;
        m.b[1] = 1.0;
        m.b[2] = 4.0;
        m.b[3] = 1.0;
        m.b[4] = 0.0;
        m.b[5] = 1.0;
        // b7..b13: harmonic amplitudes for orders 0..6
        m.b[6] = 1.0;
        m.b[7] = 0.2;
        m.b[9] = 0.8;
        // b14..b20: harmonic phase offsets
        m.b[14] = 0.5;
        m.b[16] = 0.7;
        return m;
    }

    void SarModel::validate() const
    {
        constexpr int grid = 64;
        for (int i = 0; i < grid; ++i)
        {
            const double alpha2 = 4.0 * i / (grid - 1);
            for (int j = 0; j < grid; ++j)
            {
                const double beta2 = 2.0 * pi * j / grid;
                const double s = reference_sar(*this, 1.0, alpha2, beta2);
                if (!(s > 0.0))
                {
                    std::ostringstream msg;
                    msg << "SAR model is not positive at alpha2=" << alpha2 << ", beta2=" << beta2 << " (value " << s << ")";
                    throw ConfigError(msg.str());
                }
            }
        }
    }

    SarModel read_sar_model(std::istream &in)
    {
        SarModel m;
        for (std::size_t i = 0; i < m.b.size(); ++i)
        {
            if (!(in >> m.b[i]))
                throw ConfigError("SAR model: expected 20 coefficients, got " + std::to_string(i));
        }
        double extra;
        if (in >> extra)
            throw ConfigError("SAR model: more than 20 coefficients");
        m.validate();
        return m;
    }

    SarModel load_sar_model(const std::string &path)
    {
        std::ifstream f(path);
        if (!f)
            throw ConfigError("cannot open SAR model file '" + path + "'");
        return read_sar_model(f);
    }

    double reference_sar(const SarModel &model, double alpha1, double alpha2, double beta2)
    {
        const auto &b = model.b;
        const double cross = std::sqrt(alpha1 * alpha2);
        const double base = b[0] * alpha1 + b[1] * cross + b[2] * alpha2;
        const double envelope = b[3] * alpha1 + b[4] * cross + b[5] * alpha2;
        if (envelope == 0.0)
            return base;
        double harmonics = 0.0;
        for (int k = 0; k < 7; ++k)
            harmonics += b[6 + k] * std::cos(k * beta2 + b[13 + k]);
        return base + envelope * harmonics;
    }

    double sar_vs_lobe_angle(const SarModel &model, double phi_deg, double spacing, double alpha2)
    {
        const double beta2 = -2.0 * pi * spacing * std::sin(phi_deg * pi / 180.0);
        return reference_sar(model, 1.0, alpha2, beta2);
    }

    double achievable_rate(double delta, double power, double gain, double bandwidth, double noise)
    {
        if (delta == 0.0)
            return 0.0;
        return bandwidth * delta * std::log2(1.0 + power * gain / noise);
    }

    double min_power_for_rate(double rate, double gain, double noise, double bandwidth)
    {
        if (rate <= 0.0)
            return 0.0;
        if (!(gain > 0.0))
            throw InfeasibleError("link has zero gain but a positive rate target");
        return std::expm1(rate / bandwidth * std::log(2.0)) * noise / gain;
    }

    double user_exposure(std::span<const double> delta, std::span<const double> power, std::span<const double> sar)
    {
        if (delta.size() != power.size() || delta.size() != sar.size())
            throw std::invalid_argument("user_exposure: size mismatch");
        double e = 0.0;
        for (std::size_t n = 0; n < delta.size(); ++n)
            e += delta[n] * power[n] * sar[n];
        return e;
    }

    double exposure_index(const std::vector<std::vector<double>> &exposure, double slot_duration)
    {
        if (exposure.empty())
            return 0.0;
        const std::size_t users = exposure.front().size();
        if (users == 0)
            return 0.0;
        double total = 0.0;
        for (const auto &slot : exposure)
        {
            if (slot.size() != users)
                throw std::invalid_argument("exposure_index: ragged exposure table");
            for (double e : slot)
                total += e;
        }
        return slot_duration / (static_cast<double>(exposure.size()) * users) * total;
    }

    double ExposureReport::max_user_exposure(double slot_duration) const
    {
        if (per_user_exposure.empty())
            return 0.0;
        const std::size_t users = per_user_exposure.front().size();
        double best = 0.0;
        for (std::size_t u = 0; u < users; ++u)
        {
            double sum = 0.0;
            for (const auto &slot : per_user_exposure)
                sum += slot[u];
            best = std::max(best, slot_duration / per_user_exposure.size() * sum);
        }
        return best;
    }
}
