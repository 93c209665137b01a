// SPDX-License-Identifier: Apache-2.0
//
// Channel synthesis (Rician user->ARIS and ARIS->BS links, Rayleigh direct link),
// effective channels and beamforming gain.

#ifndef ARIS_CHANNEL_HPP
#define ARIS_CHANNEL_HPP

#include "aris/scenario.hpp"
#include "aris/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace aris
{
    // f_i = sqrt(alpha_i) * exp(j * beta_i), alpha_1 = 1, beta_1 = 0.
    struct Beamformer
    {
        std::vector<double> alpha{1.0, 1.0};
        std::vector<double> beta{0.0, 0.0};

        static Beamformer two(double alpha2, double beta2) { return {{1.0, alpha2}, {0.0, beta2}}; }
        static Beamformer single() { return {{1.0}, {0.0}}; }

        int size() const { return static_cast<int>(alpha.size()); }
        CVector vector() const;
        // Throws std::invalid_argument if alpha_1 != 1, beta_1 != 0 or some alpha_i < 0.
        void validate() const;

        bool operator==(const Beamformer &) const = default;
    };

    // entry m = exp(-j 2 pi spacing m gamma)
    CVector steering_vector(int m, double gamma, double spacing);

    CMatrix standard_complex_gaussian(Rng &rng, int rows, int cols);

    // sqrt(K/(K+1)) * los + sqrt(1/(K+1)) * nlos
    CMatrix compose_rician(const CMatrix &los, const CMatrix &nlos, double k);

    double distance(const Vec3 &a, const Vec3 &b);

    // Normalized (unit path loss) line-of-sight components
    CMatrix user_aris_los(const Vec3 &user, const Vec3 &aris, const SystemParams &p, int ris_elements);
    CMatrix aris_bs_los(const Vec3 &aris, const Vec3 &bs, const SystemParams &p, int ris_elements);

    // One independent draw of each link at the given geometry
    CMatrix synth_user_aris_channel(Rng &rng, const Vec3 &user, const Vec3 &aris, const SystemParams &p);
    CMatrix synth_aris_bs_channel(Rng &rng, const Vec3 &aris, const Vec3 &bs, const SystemParams &p);
    CMatrix synth_direct_channel(Rng &rng, const Vec3 &user, const Vec3 &bs, const SystemParams &p);

    // H * diag(theta) * G + Hd
    CMatrix effective_channel(const CMatrix &h, const CVector &theta, const CMatrix &g, const CMatrix &hd);

    // gamma = f^H K f from the expanded sum over K's entries
    double gain_from_gram(const CMatrix &k, const Beamformer &f);
    double channel_gain(const CMatrix &h_eff, const Beamformer &f);

    // gamma = a / (d_uR^k1 d_RB^k2) + b / sqrt(d_uR^k1 d_RB^k2) + direct
    struct GainTerms
    {
        double a = 0.0;
        double b = 0.0;
        double direct = 0.0; // |Hd f|^2

        double gain(double path_product) const { return a / path_product + b / std::sqrt(path_product) + direct; }
    };

    GainTerms gain_decomposition(const CMatrix &h_bar, const CVector &theta, const CMatrix &g_bar, const CMatrix &hd,
                                 const CVector &f, double rho);

    // Fading state of one Monte Carlo trial: small-scale draws per (slot, subcarrier) that
    // can be combined with the line-of-sight geometry at any ARIS position.
    class ChannelRealization
    {
    public:
        ChannelRealization(const Scenario &s, std::uint64_t trial);

        int users() const { return users_; }
        int subcarriers() const { return subcarriers_; }
        int slots() const { return slots_; }
        int ris_elements() const { return ris_; }
        const SystemParams &params() const { return params_; }
        const std::vector<Vec3> &user_positions() const { return user_pos_; }
        const Vec3 &bs_position() const { return bs_; }

        // Distance-free Rician brackets and the scaled channels at ARIS position q
        CMatrix g_bar(int u, int n, int slot, const Vec3 &q) const;
        CMatrix h_bar(int n, int slot, const Vec3 &q) const;
        CMatrix g(int u, int n, int slot, const Vec3 &q) const;
        CMatrix h(int n, int slot, const Vec3 &q) const;
        const CMatrix &hd(int u, int n, int slot) const { return hd_[index(u, n, slot)]; }

        double g_scale(int u, const Vec3 &q) const;
        double h_scale(const Vec3 &q) const;

        // FNV-1a over every stored draw; equal hashes mean identical tensors.
        std::uint64_t fingerprint() const;

    private:
        std::size_t index(int u, int n, int slot) const
        {
            return (static_cast<std::size_t>(slot) * subcarriers_ + n) * users_ + u;
        }

        SystemParams params_;
        std::vector<Vec3> user_pos_;
        Vec3 bs_;
        int users_, subcarriers_, slots_, ris_;
        std::vector<CMatrix> g_nlos_;  // [slot][n][u], N x M_t
        std::vector<CMatrix> h_nlos_;  // [slot][n], M_r x N
        std::vector<CMatrix> hd_;      // [slot][n][u], M_r x M_t, scaled
    };

    // Text dump: header "rows cols", then one "(re,im)" token per entry, row-major.
    void write_matrix(std::ostream &out, const CMatrix &m);
    CMatrix read_matrix(std::istream &in);
}

#endif
