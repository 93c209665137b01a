// SPDX-License-Identifier: Apache-2.0

#include "aris/beamforming.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace aris
{
    namespace
    {
        constexpr double inf = std::numeric_limits<double>::infinity();

        double wrap_phase(double b)
        {
            b = std::fmod(b, 2.0 * pi);
            if (b < 0.0)
                b += 2.0 * pi;
            if (b >= 2.0 * pi)
                b = 0.0;
            return b;
        }

        // gain of f = (1, sqrt(alpha2) e^{j beta2}) on a 2x2 Gram matrix
        double gain2(const CMatrix &k, double alpha2, double beta2)
        {
            const double g = k(0, 0).real() + alpha2 * k(1, 1).real() +
                             2.0 * std::abs(k(0, 1)) * std::sqrt(alpha2) * std::cos(beta2 + std::arg(k(0, 1)));
            return std::max(g, 0.0);
        }
    }

    double rate_scale(double rate, double noise, double bandwidth)
    {
        return noise * std::expm1(rate / bandwidth * std::log(2.0));
    }

    double dinkelbach_objective(const Beamformer &f, double lambda, const CMatrix &k, const SarModel &model, double scale,
                                double delta)
    {
        if (delta == 0.0)
            return 0.0;
        const double sar = reference_sar(model, f.alpha[0], f.alpha[1], f.beta[1] - f.beta[0]);
        return delta * (scale * sar - lambda * gain_from_gram(k, f));
    }

    BeamformingSolver::BeamformingSolver(const SarModel &model, BeamformingOptions opts) : model_(model), opts_(opts)
    {
        const int g = opts_.grid;
        alphas_.resize(g);
        betas_.resize(g);
        sar_table_.resize(static_cast<std::size_t>(g) * g);
        for (int i = 0; i < g; ++i)
        {
            alphas_[i] = opts_.alpha_max * i / (g - 1);
            betas_[i] = 2.0 * pi * i / g;
        }
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i)
                sar_table_[static_cast<std::size_t>(j) * g + i] = sar(alphas_[i], betas_[j]);
    }

    void BeamformingSolver::grid_gains(const CMatrix &k, std::vector<double> &gains) const
    {
        const int g = opts_.grid;
        gains.resize(static_cast<std::size_t>(g) * g);
        const double k11 = k(0, 0).real(), k22 = k(1, 1).real();
        const double m = 2.0 * std::abs(k(0, 1)), phi = std::arg(k(0, 1));
        for (int j = 0; j < g; ++j)
        {
            const double c = m * std::cos(betas_[j] + phi);
            for (int i = 0; i < g; ++i)
                gains[static_cast<std::size_t>(j) * g + i] = std::max(k11 + alphas_[i] * k22 + c * std::sqrt(alphas_[i]), 0.0);
        }
    }

    BeamformingSolver::Candidate BeamformingSolver::refine(Candidate start, double lambda, const CMatrix &k,
                                                           double scale) const
    {
        auto value = [&](double a, double b)
        { return scale * sar(a, b) - lambda * gain2(k, a, b); };
        auto clamp = [&](std::array<double, 2> p)
        { return std::array<double, 2>{std::clamp(p[0], 0.0, opts_.alpha_max), p[1]}; };

        // Nelder-Mead on (alpha2, beta2); alpha2 clamped to the box, beta2 wrapped on exit
        double step = opts_.alpha_max / (opts_.grid - 1);
        if (start.alpha2 + step > opts_.alpha_max)
            step = -step;
        std::array<std::array<double, 2>, 3> x{{{start.alpha2, start.beta2},
                                                {start.alpha2 + step, start.beta2},
                                                {start.alpha2, start.beta2 + 2.0 * pi / opts_.grid}}};
        std::array<double, 3> f{};
        for (int v = 0; v < 3; ++v)
        {
            x[v] = clamp(x[v]);
            f[v] = value(x[v][0], x[v][1]);
        }
        for (int it = 0; it < 400; ++it)
        {
            std::array<int, 3> order{0, 1, 2};
            std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
            const auto best = x[order[0]], mid = x[order[1]], worst = x[order[2]];
            const double fb = f[order[0]], fm = f[order[1]], fw = f[order[2]];
            double size = 0.0;
            for (int v : {order[1], order[2]})
            {
                size = std::max(size, std::max(std::abs(x[v][0] - best[0]), std::abs(x[v][1] - best[1])));
            }
            if (size < opts_.refine_tol)
                break;

            const std::array<double, 2> centroid{(best[0] + mid[0]) / 2.0, (best[1] + mid[1]) / 2.0};
            auto along = [&](double t)
            {
                return std::array<double, 2>{centroid[0] + t * (worst[0] - centroid[0]),
                                             centroid[1] + t * (worst[1] - centroid[1])};
            };
            auto reflected = clamp(along(-1.0));
            const double fr = value(reflected[0], reflected[1]);
            if (fr < fb)
            {
                auto expanded = clamp(along(-2.0));
                const double fe = value(expanded[0], expanded[1]);
                if (fe < fr)
                    x[order[2]] = expanded, f[order[2]] = fe;
                else
                    x[order[2]] = reflected, f[order[2]] = fr;
                continue;
            }
            if (fr < fm)
            {
                x[order[2]] = reflected, f[order[2]] = fr;
                continue;
            }
            auto contracted = clamp(fr < fw ? along(-0.5) : along(0.5));
            const double fc = value(contracted[0], contracted[1]);
            if (fc < std::min(fr, fw))
            {
                x[order[2]] = contracted, f[order[2]] = fc;
                continue;
            }
            for (int v : {order[1], order[2]})
            {
                x[v] = clamp({(x[v][0] + best[0]) / 2.0, best[1] + (x[v][1] - best[1]) / 2.0});
                f[v] = value(x[v][0], x[v][1]);
            }
        }
        int b = 0;
        for (int v = 1; v < 3; ++v)
            if (f[v] < f[b])
                b = v;
        if (f[b] < start.value)
            return {x[b][0], wrap_phase(x[b][1]), f[b]};
        return start;
    }

    Beamformer BeamformingSolver::solve_inner(double lambda, const CMatrix &k, double scale) const
    {
        if (k.rows() != 2 || k.cols() != 2)
            throw std::invalid_argument("beamforming: two transmit antennas required");
        const int g = opts_.grid;
        std::vector<double> gains;
        grid_gains(k, gains);

        // three best grid points, scanned beta-major so ties go to the lowest beta then alpha
        std::array<Candidate, 3> top;
        top.fill({0.0, 0.0, inf});
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i)
            {
                const std::size_t idx = static_cast<std::size_t>(j) * g + i;
                const double v = scale * sar_table_[idx] - lambda * gains[idx];
                for (int t = 0; t < 3; ++t)
                {
                    if (v < top[t].value)
                    {
                        for (int s = 2; s > t; --s)
                            top[s] = top[s - 1];
                        top[t] = {alphas_[i], betas_[j], v};
                        break;
                    }
                }
            }
        Candidate best = top[0];
        for (const auto &c : top)
        {
            if (!std::isfinite(c.value))
                continue;
            const Candidate r = refine(c, lambda, k, scale);
            if (r.value < best.value)
                best = r;
        }
        return Beamformer::two(best.alpha2, best.beta2);
    }

    BeamformingResult BeamformingSolver::optimize(const CMatrix &k, double scale, const Beamformer &init) const
    {
        if (k.rows() != 2 || k.cols() != 2)
            throw std::invalid_argument("beamforming: two transmit antennas required");
        init.validate();
        // the argmin does not depend on the positive scale, so iterate with unit scale
        auto ratio = [&](double a, double b)
        {
            const double g = gain2(k, a, b);
            return g > 0.0 ? sar(a, b) / g : inf;
        };

        const int g = opts_.grid;
        std::vector<double> gains;
        grid_gains(k, gains);
        double a = init.alpha[1], b = wrap_phase(init.beta[1]);
        double lambda = ratio(a, b);
        for (int j = 0; j < g; ++j)
            for (int i = 0; i < g; ++i)
            {
                const std::size_t idx = static_cast<std::size_t>(j) * g + i;
                if (gains[idx] > 0.0 && sar_table_[idx] / gains[idx] < lambda)
                {
                    lambda = sar_table_[idx] / gains[idx];
                    a = alphas_[i];
                    b = betas_[j];
                }
            }
        if (!std::isfinite(lambda))
            throw InfeasibleError("beamforming: channel has zero gain for every beamformer");

        BeamformingResult res;
        res.lambda_trace.push_back(lambda);
        for (int it = 0; it < opts_.max_iter; ++it)
        {
            ++res.iterations;
            const Beamformer next = solve_inner(lambda, k, 1.0);
            const double r = ratio(next.alpha[1], next.beta[1]);
            if (!(r < lambda))
            {
                res.converged = true;
                break;
            }
            const double change = lambda - r;
            a = next.alpha[1];
            b = next.beta[1];
            lambda = r;
            res.lambda_trace.push_back(lambda);
            if (change <= opts_.eps1 * lambda)
            {
                res.converged = true;
                break;
            }
        }
        const double s = scale > 0.0 ? scale : 0.0;
        for (double &l : res.lambda_trace)
            l *= s;
        res.f = Beamformer::two(a, b);
        res.ratio = s * lambda;
        return res;
    }
}
