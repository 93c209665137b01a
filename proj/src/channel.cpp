// SPDX-License-Identifier: Apache-2.0

#include "aris/channel.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace aris
{
    CVector Beamformer::vector() const
    {
        CVector f(size());
        for (int i = 0; i < size(); ++i)
            f(i) = std::polar(std::sqrt(alpha[i]), beta[i]);
        return f;
    }

    void Beamformer::validate() const
    {
        if (alpha.empty() || alpha.size() != beta.size())
            throw std::invalid_argument("beamformer: alpha and beta must have equal non-zero length");
        if (alpha[0] != 1.0 || beta[0] != 0.0)
            throw std::invalid_argument("beamformer: reference antenna must have alpha = 1, beta = 0");
        for (double a : alpha)
        {
            if (!(a >= 0.0))
                throw std::invalid_argument("beamformer: negative power share");
        }
    }

    CVector steering_vector(int m, double gamma, double spacing)
    {
        CVector a(m);
        for (int i = 0; i < m; ++i)
            a(i) = std::polar(1.0, -2.0 * pi * spacing * i * gamma);
        return a;
    }

    CMatrix standard_complex_gaussian(Rng &rng, int rows, int cols)
    {
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        CMatrix w(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
            {
                const double re = nd(rng);
                w(r, c) = cdouble(re, nd(rng));
            }
        return w;
    }

    CMatrix compose_rician(const CMatrix &los, const CMatrix &nlos, double k)
    {
        return std::sqrt(k / (k + 1.0)) * los + std::sqrt(1.0 / (k + 1.0)) * nlos;
    }

    double distance(const Vec3 &a, const Vec3 &b) { return (a - b).norm(); }

    namespace
    {
        double checked_distance(const Vec3 &a, const Vec3 &b)
        {
            const double d = distance(a, b);
            if (!(d > 0.0))
                throw std::domain_error("degenerate geometry: zero link distance");
            return d;
        }

        double clamp_sine(double s) { return std::max(-1.0, std::min(1.0, s)); }
    }

    CMatrix user_aris_los(const Vec3 &user, const Vec3 &aris, const SystemParams &p, int ris_elements)
    {
        const double d = checked_distance(user, aris);
        const double arrival = clamp_sine((user.y() - aris.y()) / d);
        const double departure = p.departure_uses_x ? clamp_sine((user.x() - aris.x()) / d) : arrival;
        return steering_vector(ris_elements, arrival, p.antenna_spacing_ratio) *
               steering_vector(p.tx_antennas, departure, p.antenna_spacing_ratio).adjoint();
    }

    CMatrix aris_bs_los(const Vec3 &aris, const Vec3 &bs, const SystemParams &p, int ris_elements)
    {
        const double d = checked_distance(aris, bs);
        const double eta = clamp_sine((bs.x() - aris.x()) / d);
        return steering_vector(p.rx_antennas, eta, p.antenna_spacing_ratio) *
               steering_vector(ris_elements, eta, p.antenna_spacing_ratio).adjoint();
    }

    CMatrix synth_user_aris_channel(Rng &rng, const Vec3 &user, const Vec3 &aris, const SystemParams &p)
    {
        const double d = checked_distance(user, aris);
        const CMatrix w = standard_complex_gaussian(rng, p.num_ris_elements, p.tx_antennas);
        const double scale = std::sqrt(p.los_pathloss_ref * std::pow(d, -p.ris_pathloss_exp1));
        return scale * compose_rician(user_aris_los(user, aris, p, p.num_ris_elements), w, p.rician_k1);
    }

    CMatrix synth_aris_bs_channel(Rng &rng, const Vec3 &aris, const Vec3 &bs, const SystemParams &p)
    {
        const double d = checked_distance(aris, bs);
        const CMatrix w = standard_complex_gaussian(rng, p.rx_antennas, p.num_ris_elements);
        const double scale = std::sqrt(p.los_pathloss_ref * std::pow(d, -p.ris_pathloss_exp2));
        return scale * compose_rician(aris_bs_los(aris, bs, p, p.num_ris_elements), w, p.rician_k2);
    }

    CMatrix synth_direct_channel(Rng &rng, const Vec3 &user, const Vec3 &bs, const SystemParams &p)
    {
        const double d = checked_distance(user, bs);
        const double scale = std::sqrt(p.nlos_pathloss_ref * std::pow(d, -p.direct_pathloss_exp));
        return scale * standard_complex_gaussian(rng, p.rx_antennas, p.tx_antennas);
    }

    CMatrix effective_channel(const CMatrix &h, const CVector &theta, const CMatrix &g, const CMatrix &hd)
    {
        if (h.cols() != theta.size() || g.rows() != theta.size() || h.rows() != hd.rows() || g.cols() != hd.cols())
            throw std::invalid_argument("effective_channel: dimension mismatch");
        if (theta.size() == 0)
            return hd;
        return h * theta.asDiagonal() * g + hd;
    }

    double gain_from_gram(const CMatrix &k, const Beamformer &f)
    {
        const int m = f.size();
        if (k.rows() != m || k.cols() != m)
            throw std::invalid_argument("gain_from_gram: dimension mismatch");
        double g = 0.0;
        for (int i = 0; i < m; ++i)
        {
            g += f.alpha[i] * k(i, i).real();
            for (int j = i + 1; j < m; ++j)
                g += 2.0 * std::abs(k(i, j)) * std::sqrt(f.alpha[i] * f.alpha[j]) *
                     std::cos(f.beta[j] - f.beta[i] + std::arg(k(i, j)));
        }
        return std::max(g, 0.0);
    }

    double channel_gain(const CMatrix &h_eff, const Beamformer &f)
    {
        return gain_from_gram(h_eff.adjoint() * h_eff, f);
    }

    GainTerms gain_decomposition(const CMatrix &h_bar, const CVector &theta, const CMatrix &g_bar, const CMatrix &hd,
                                 const CVector &f, double rho)
    {
        GainTerms t;
        const CVector hdf = hd * f;
        t.direct = hdf.squaredNorm();
        if (theta.size() == 0)
            return t;
        const CVector cascade = h_bar * (theta.asDiagonal() * (g_bar * f));
        t.a = rho * rho * cascade.squaredNorm();
        t.b = 2.0 * rho * hdf.dot(cascade).real(); // dot() conjugates the left operand
        return t;
    }

    ChannelRealization::ChannelRealization(const Scenario &s, std::uint64_t trial)
        : params_(s.params),
          user_pos_(s.user_positions),
          bs_(s.bs_position),
          users_(s.params.num_users),
          subcarriers_(s.params.num_subcarriers),
          slots_(s.params.num_slots),
          ris_(s.params.num_ris_elements)
    {
        const int mt = params_.tx_antennas;
        const int mr = params_.rx_antennas;
        const std::size_t cells = static_cast<std::size_t>(slots_) * subcarriers_ * users_;
        g_nlos_.resize(cells);
        hd_.resize(cells);
        h_nlos_.resize(static_cast<std::size_t>(slots_) * subcarriers_);

        // One stream per matrix row (G) or column (H, Hd) so that growing N or M_r
        // keeps the existing entries.
        for (int l = 0; l < slots_; ++l)
            for (int n = 0; n < subcarriers_; ++n)
            {
                CMatrix hn(mr, ris_);
                for (int col = 0; col < ris_; ++col)
                {
                    Rng rng(derive_seed(s.rng_seed, trial, tag(StreamTag::ris_bs), l, n, col));
                    hn.col(col) = standard_complex_gaussian(rng, mr, 1);
                }
                h_nlos_[static_cast<std::size_t>(l) * subcarriers_ + n] = std::move(hn);

                for (int u = 0; u < users_; ++u)
                {
                    CMatrix gn(ris_, mt);
                    for (int row = 0; row < ris_; ++row)
                    {
                        Rng rng(derive_seed(s.rng_seed, trial, tag(StreamTag::user_ris), l, n, u, row));
                        gn.row(row) = standard_complex_gaussian(rng, 1, mt);
                    }
                    g_nlos_[index(u, n, l)] = std::move(gn);

                    const double d = distance(user_pos_[u], bs_);
                    if (!(d > 0.0))
                        throw std::domain_error("degenerate geometry: user at the base station");
                    const double scale = std::sqrt(params_.nlos_pathloss_ref * std::pow(d, -params_.direct_pathloss_exp));
                    CMatrix hd(mr, mt);
                    for (int col = 0; col < mt; ++col)
                    {
                        Rng rng(derive_seed(s.rng_seed, trial, tag(StreamTag::direct), l, n, u, col));
                        hd.col(col) = scale * standard_complex_gaussian(rng, mr, 1);
                    }
                    hd_[index(u, n, l)] = std::move(hd);
                }
            }
    }

    double ChannelRealization::g_scale(int u, const Vec3 &q) const
    {
        return std::sqrt(params_.los_pathloss_ref * std::pow(checked_distance(user_pos_[u], q), -params_.ris_pathloss_exp1));
    }

    double ChannelRealization::h_scale(const Vec3 &q) const
    {
        return std::sqrt(params_.los_pathloss_ref * std::pow(checked_distance(q, bs_), -params_.ris_pathloss_exp2));
    }

    CMatrix ChannelRealization::g_bar(int u, int n, int slot, const Vec3 &q) const
    {
        return compose_rician(user_aris_los(user_pos_[u], q, params_, ris_), g_nlos_[index(u, n, slot)], params_.rician_k1);
    }

    CMatrix ChannelRealization::h_bar(int n, int slot, const Vec3 &q) const
    {
        return compose_rician(aris_bs_los(q, bs_, params_, ris_), h_nlos_[static_cast<std::size_t>(slot) * subcarriers_ + n],
                              params_.rician_k2);
    }

    CMatrix ChannelRealization::g(int u, int n, int slot, const Vec3 &q) const { return g_scale(u, q) * g_bar(u, n, slot, q); }

    CMatrix ChannelRealization::h(int n, int slot, const Vec3 &q) const { return h_scale(q) * h_bar(n, slot, q); }

    std::uint64_t ChannelRealization::fingerprint() const
    {
        std::uint64_t hash = 0xcbf29ce484222325ull;
        auto feed = [&](const CMatrix &m)
        {
            const auto *bytes = reinterpret_cast<const unsigned char *>(m.data());
            const std::size_t count = static_cast<std::size_t>(m.size()) * sizeof(cdouble);
            for (std::size_t i = 0; i < count; ++i)
            {
                hash ^= bytes[i];
                hash *= 0x100000001b3ull;
            }
        };
        for (const auto &m : g_nlos_)
            feed(m);
        for (const auto &m : h_nlos_)
            feed(m);
        for (const auto &m : hd_)
            feed(m);
        return hash;
    }

    void write_matrix(std::ostream &out, const CMatrix &m)
    {
        char buf[96];
        out << m.rows() << " " << m.cols() << "\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r)
        {
            for (Eigen::Index c = 0; c < m.cols(); ++c)
            {
                std::snprintf(buf, sizeof buf, "(%.17g,%.17g)", m(r, c).real(), m(r, c).imag());
                out << (c ? " " : "") << buf;
            }
            out << "\n";
        }
    }

    CMatrix read_matrix(std::istream &in)
    {
        Eigen::Index rows = 0, cols = 0;
        if (!(in >> rows >> cols) || rows < 0 || cols < 0)
            throw std::runtime_error("matrix dump: bad header");
        CMatrix m(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
            {
                cdouble z;
                if (!(in >> z))
                    throw std::runtime_error("matrix dump: truncated data");
                m(r, c) = z;
            }
        return m;
    }
}
