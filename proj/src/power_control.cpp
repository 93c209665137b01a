// SPDX-License-Identifier: Apache-2.0

#include "aris/power_control.hpp"
#include "aris/convex.hpp"
#include "aris/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace aris
{
    namespace
    {
        const double ln2 = std::log(2.0);

        struct Split
        {
            double mu = 0.0;
            std::vector<double> power;
        };

        // Rate-equality water-filling for weights sar + lambda: p_n = noise/gain (mu k_n - 1)^+,
        // k_n = w gain / (ln2 (sar + lambda) noise).
        Split water_fill(const PowerProblem &p, const std::vector<double> &weight)
        {
            const std::size_t l = p.links.size();
            std::vector<double> logk(l);
            for (std::size_t n = 0; n < l; ++n)
                logk[n] = std::log2(p.bandwidth * p.links[n].gain / (ln2 * weight[n] * p.noise));
            std::vector<std::size_t> order(l);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return logk[a] > logk[b]; });

            const double target = p.rate_target / p.bandwidth;
            double sum = 0.0, log_mu = 0.0;
            std::size_t active = 0;
            for (std::size_t m = 1; m <= l; ++m)
            {
                sum += logk[order[m - 1]];
                const double lm = (target - sum) / static_cast<double>(m);
                active = m;
                log_mu = lm;
                if (m == l || lm + logk[order[m]] <= 0.0)
                    break;
            }
            Split s;
            s.mu = std::exp2(log_mu);
            s.power.assign(l, 0.0);
            for (std::size_t i = 0; i < active; ++i)
            {
                const std::size_t n = order[i];
                s.power[n] = std::max(p.noise / p.links[n].gain * std::expm1((log_mu + logk[n]) * ln2), 0.0);
            }
            return s;
        }

        std::vector<double> weights(const PowerProblem &p, double lambda)
        {
            std::vector<double> w(p.links.size());
            for (std::size_t n = 0; n < w.size(); ++n)
                w[n] = p.links[n].sar + lambda;
            return w;
        }

        double total(const std::vector<double> &v) { return std::accumulate(v.begin(), v.end(), 0.0); }

        void validate(const PowerProblem &p)
        {
            if (p.links.empty())
                throw std::invalid_argument("allocate_power: no resource elements");
            if (!(p.noise > 0.0) || !(p.bandwidth > 0.0) || !(p.p_max > 0.0))
                throw std::invalid_argument("allocate_power: noise, bandwidth and p_max must be positive");
            for (const auto &l : p.links)
            {
                if (!(l.sar > 0.0))
                    throw std::invalid_argument("allocate_power: SAR must be positive");
                if (!(l.gain > 0.0))
                    throw InfeasibleError("allocate_power: resource element with zero gain");
            }
        }
    }

    double optimal_power_formula(double mu, double lambda, double sar, double gain, double noise, double bandwidth,
                                 double delta)
    {
        if (delta == 0.0)
            return 0.0;
        return std::max(delta * bandwidth * mu / (ln2 * (sar + lambda)) - delta * noise / gain, 0.0);
    }

    double sum_rate(const PowerProblem &p, const std::vector<double> &power)
    {
        double r = 0.0;
        for (std::size_t n = 0; n < p.links.size(); ++n)
            r += p.bandwidth * std::log1p(power[n] * p.links[n].gain / p.noise) / ln2;
        return r;
    }

    double min_total_power(const PowerProblem &p)
    {
        validate(p);
        if (p.rate_target <= 0.0)
            return 0.0;
        return total(water_fill(p, std::vector<double>(p.links.size(), 1.0)).power);
    }

    PowerAllocation allocate_power(const PowerProblem &p)
    {
        validate(p);
        PowerAllocation out;
        const std::size_t l = p.links.size();
        if (p.rate_target <= 0.0)
        {
            out.power.assign(l, 0.0);
            out.rate_share.assign(l, 0.0);
            return out;
        }

        Split s = water_fill(p, weights(p, 0.0));
        if (total(s.power) > p.p_max)
        {
            const double p_min = min_total_power(p);
            if (p_min > p.p_max)
            {
                std::ostringstream msg;
                msg << "allocate_power: rate target " << p.rate_target << " bit/s needs at least " << p_min
                    << " W but the budget is " << p.p_max << " W";
                throw InfeasibleError(msg.str());
            }
            out.cap_active = true;
            double sar_scale = 0.0;
            for (const auto &link : p.links)
                sar_scale = std::max(sar_scale, link.sar);

            // Newton on (ln mu, lambda / sar_scale) for rate equality and a tight budget
            auto eval = [&](const Eigen::VectorXd &z, Eigen::MatrixXd *jac)
            {
                const double mu = std::exp(z(0)), lambda = z(1) * sar_scale;
                Eigen::VectorXd f(2);
                f.setZero();
                if (jac)
                    jac->setZero(2, 2);
                for (std::size_t n = 0; n < l; ++n)
                {
                    const double wsum = p.links[n].sar + lambda;
                    const double pn = p.bandwidth * mu / (ln2 * wsum) - p.noise / p.links[n].gain;
                    if (pn <= 0.0)
                        continue;
                    f(0) += p.bandwidth * std::log1p(pn * p.links[n].gain / p.noise) / ln2;
                    f(1) += pn;
                    if (jac)
                    {
                        const double dp_dlnmu = p.bandwidth * mu / (ln2 * wsum);
                        const double dp_dlambda = -dp_dlnmu / wsum * sar_scale;
                        (*jac)(0, 0) += p.bandwidth / ln2 / p.rate_target;
                        (*jac)(0, 1) += -p.bandwidth / (ln2 * wsum) * sar_scale / p.rate_target;
                        (*jac)(1, 0) += dp_dlnmu / p.p_max;
                        (*jac)(1, 1) += dp_dlambda / p.p_max;
                    }
                }
                f(0) = (f(0) - p.rate_target) / p.rate_target;
                f(1) = (f(1) - p.p_max) / p.p_max;
                return f;
            };
            bool solved = false;
            try
            {
                Eigen::VectorXd z0(2);
                z0 << std::log(s.mu), 0.0;
                const Eigen::VectorXd z = newton_solve([&](const Eigen::VectorXd &z) { return eval(z, nullptr); },
                                                       [&](const Eigen::VectorXd &z)
                                                       {
                                                           Eigen::MatrixXd j;
                                                           eval(z, &j);
                                                           return j;
                                                       },
                                                       z0, NewtonOptions{1e-13, 100, 30});
                if (z(1) >= 0.0)
                {
                    out.lambda = z(1) * sar_scale;
                    s = water_fill(p, weights(p, out.lambda));
                    solved = std::abs(total(s.power) - p.p_max) <= 1e-10 * p.p_max;
                }
            }
            catch (const ConvergenceError &)
            {
            }
            if (!solved)
            {
                // total power decreases in lambda towards p_min; bracket and bisect
                out.newton_fallback = true;
                auto excess = [&](double lambda) { return total(water_fill(p, weights(p, lambda)).power) - p.p_max; };
                double hi = sar_scale;
                for (int i = 0; i < 200 && excess(hi) > 0.0; ++i)
                    hi *= 2.0;
                out.lambda = excess(hi) > 0.0 ? hi : bisect(excess, 0.0, hi, 0.0);
                s = water_fill(p, weights(p, out.lambda));
            }
        }
        out.mu = s.mu;
        out.power = s.power;
        out.rate_share.resize(l);
        for (std::size_t n = 0; n < l; ++n)
            out.rate_share[n] = p.bandwidth * std::log1p(out.power[n] * p.links[n].gain / p.noise) / ln2;
        return out;
    }
}
