// SPDX-License-Identifier: Apache-2.0

#include "aris/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace aris;

namespace
{
    SystemParams small_params(int ris = 4, int mr = 3)
    {
        SystemParams p;
        p.num_ris_elements = ris;
        p.rx_antennas = mr;
        return p;
    }

    CMatrix random_psd(Rng &rng, int m)
    {
        const CMatrix a = standard_complex_gaussian(rng, m + 1, m);
        return a.adjoint() * a;
    }

    // |sum_i f_i h_i|^2 computed entry by entry
    double naive_gain(const CMatrix &h, const Beamformer &f)
    {
        double total = 0.0;
        for (int r = 0; r < h.rows(); ++r)
        {
            cdouble acc = 0.0;
            for (int i = 0; i < f.size(); ++i)
                acc += h(r, i) * std::polar(std::sqrt(f.alpha[i]), f.beta[i]);
            total += std::norm(acc);
        }
        return total;
    }
}

TEST(Steering, Broadside)
{
    const CVector a = steering_vector(3, 0.0, 0.37);
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(std::abs(a(i) - cdouble(1.0, 0.0)), 0.0, 1e-15);
}

TEST(Steering, Endfire)
{
    const CVector a = steering_vector(4, 1.0, 0.5);
    const double expect[] = {1.0, -1.0, 1.0, -1.0};
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(std::abs(a(i) - expect[i]), 0.0, 1e-12);
}

TEST(Steering, QuarterTurn)
{
    const CVector a = steering_vector(2, 0.5, 0.5);
    EXPECT_NEAR(std::abs(a(0) - cdouble(1.0, 0.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(a(1) - cdouble(0.0, -1.0)), 0.0, 1e-12);
}

TEST(Steering, UnitModulus)
{
    const CVector a = steering_vector(17, 0.3141, 0.5);
    for (int i = 0; i < a.size(); ++i)
        EXPECT_NEAR(std::abs(a(i)), 1.0, 1e-15);
}

TEST(UserArisChannel, PureLosIsRankOne)
{
    SystemParams p = small_params(5);
    p.rician_k1 = 1e14;
    Rng rng(3);
    const Vec3 user(10.0, -20.0, 0.0), aris(30.0, 40.0, 100.0);
    const CMatrix g = synth_user_aris_channel(rng, user, aris, p);
    const double d = (user - aris).norm();
    const double expect = p.los_pathloss_ref * std::pow(d, -p.ris_pathloss_exp1) * 5 * 2;
    EXPECT_NEAR(g.squaredNorm() / expect, 1.0, 1e-6);
    Eigen::JacobiSVD<CMatrix> svd(g);
    EXPECT_LT(svd.singularValues()(1), 1e-5 * svd.singularValues()(0));
}

TEST(UserArisChannel, UnitScalarLink)
{
    SystemParams p = small_params(1);
    p.tx_antennas = 1;
    p.rician_k1 = 1e14;
    p.los_pathloss_ref = 1.0;
    Rng rng(5);
    const CMatrix g = synth_user_aris_channel(rng, Vec3(0, 0, 0), Vec3(0, 0, 1), p);
    ASSERT_EQ(g.size(), 1);
    EXPECT_NEAR(std::abs(g(0, 0)), 1.0, 1e-6);
}

TEST(UserArisChannel, RayleighPower)
{
    SystemParams p = small_params(4);
    p.rician_k1 = 0.0;
    Rng rng(17);
    const Vec3 user(0, 0, 0), aris(0, 0, 50.0);
    double sum = 0.0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
        sum += synth_user_aris_channel(rng, user, aris, p).squaredNorm() / (4 * 2);
    const double expect = p.los_pathloss_ref * std::pow(50.0, -p.ris_pathloss_exp1);
    EXPECT_NEAR(sum / draws / expect, 1.0, 0.03);
}

TEST(UserArisChannel, DoublingDistanceScalesPower)
{
    SystemParams p = small_params(4);
    Rng a(1), b(2);
    const Vec3 user(0, 0, 0);
    double near = 0.0, far = 0.0;
    for (int i = 0; i < 10000; ++i)
    {
        near += synth_user_aris_channel(a, user, Vec3(0, 0, 40.0), p).squaredNorm();
        far += synth_user_aris_channel(b, user, Vec3(0, 0, 80.0), p).squaredNorm();
    }
    EXPECT_NEAR((far / near) / std::pow(2.0, -p.ris_pathloss_exp1), 1.0, 0.03);
}

TEST(UserArisChannel, DegenerateGeometry)
{
    Rng rng(1);
    const Vec3 q(1, 2, 3);
    EXPECT_THROW(synth_user_aris_channel(rng, q, q, small_params()), std::domain_error);
}

TEST(ArisBsChannel, PureLosIsRankOne)
{
    SystemParams p = small_params(6, 4);
    p.rician_k2 = 1e14;
    Rng rng(8);
    const Vec3 aris(-50.0, 30.0, 100.0), bs(0, 0, 25.0);
    const CMatrix h = synth_aris_bs_channel(rng, aris, bs, p);
    ASSERT_EQ(h.rows(), 4);
    ASSERT_EQ(h.cols(), 6);
    const double d = (aris - bs).norm();
    EXPECT_NEAR(h.squaredNorm() / (p.los_pathloss_ref * std::pow(d, -p.ris_pathloss_exp2) * 24), 1.0, 1e-6);
}

TEST(ArisBsChannel, RayleighPower)
{
    SystemParams p = small_params(3, 2);
    p.rician_k2 = 0.0;
    Rng rng(21);
    const Vec3 aris(0, 0, 60.0), bs(0, 0, 25.0);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i)
        sum += synth_aris_bs_channel(rng, aris, bs, p).squaredNorm() / 6;
    EXPECT_NEAR(sum / 10000 / (p.los_pathloss_ref * std::pow(35.0, -p.ris_pathloss_exp2)), 1.0, 0.03);
}

TEST(ArisBsChannel, UnitScalarLink)
{
    SystemParams p = small_params(1, 1);
    p.rician_k2 = 1e14;
    p.los_pathloss_ref = 1.0;
    Rng rng(5);
    const CMatrix h = synth_aris_bs_channel(rng, Vec3(0, 0, 26.0), Vec3(0, 0, 25.0), p);
    EXPECT_NEAR(std::abs(h(0, 0)), 1.0, 1e-6);
}

TEST(DirectChannel, UnitVariance)
{
    SystemParams p = small_params(2, 4);
    p.nlos_pathloss_ref = 1.0;
    Rng rng(4);
    double power = 0.0;
    cdouble mean = 0.0;
    const int draws = 10000, entries = 4 * 2;
    for (int i = 0; i < draws; ++i)
    {
        const CMatrix hd = synth_direct_channel(rng, Vec3(0, 0, 0), Vec3(0, 0, 1.0), p);
        power += hd.squaredNorm();
        mean += hd.sum();
    }
    const double n = static_cast<double>(draws) * entries;
    EXPECT_NEAR(power / n, 1.0, 0.03);
    // real and imaginary parts each have variance 1/2 per entry
    EXPECT_LT(std::abs(mean.real() / n), 3.0 * std::sqrt(0.5 / n));
    EXPECT_LT(std::abs(mean.imag() / n), 3.0 * std::sqrt(0.5 / n));
}

TEST(DirectChannel, PathLossExponent)
{
    SystemParams p = small_params(2, 4);
    Rng a(9), b(9);
    const CMatrix at1 = synth_direct_channel(a, Vec3(0, 0, 0), Vec3(0, 0, 1.0), p);
    const CMatrix at10 = synth_direct_channel(b, Vec3(0, 0, 0), Vec3(0, 0, 10.0), p);
    // same draw, so the ratio is exactly the path-loss factor
    EXPECT_NEAR(at10.squaredNorm() / at1.squaredNorm() / std::pow(10.0, -3.908), 1.0, 1e-12);
}

TEST(EffectiveChannel, ZeroCascadeGivesDirect)
{
    Rng rng(1);
    const CMatrix h = standard_complex_gaussian(rng, 3, 4);
    const CMatrix hd = standard_complex_gaussian(rng, 3, 2);
    const CVector theta = CVector::Ones(4);
    const CMatrix out = effective_channel(h, theta, CMatrix::Zero(4, 2), hd);
    EXPECT_NEAR((out - hd).norm(), 0.0, 1e-15);
}

TEST(EffectiveChannel, SinglePhaseRotates)
{
    Rng rng(2);
    const CMatrix h = standard_complex_gaussian(rng, 3, 1);
    const CMatrix g = standard_complex_gaussian(rng, 1, 2);
    const CMatrix hd = CMatrix::Zero(3, 2);
    for (double phi : {0.0, 0.7, 2.5, -1.2})
    {
        CVector theta(1);
        theta(0) = std::polar(1.0, phi);
        const CMatrix out = effective_channel(h, theta, g, hd);
        EXPECT_NEAR((out - std::polar(1.0, phi) * (h * g)).norm(), 0.0, 1e-12);
        EXPECT_NEAR(out.norm(), (h * g).norm(), 1e-12);
    }
}

TEST(EffectiveChannel, MatchesTripleLoop)
{
    Rng rng(3);
    const int mr = 4, n = 5, mt = 2;
    const CMatrix h = standard_complex_gaussian(rng, mr, n);
    const CMatrix g = standard_complex_gaussian(rng, n, mt);
    const CMatrix hd = standard_complex_gaussian(rng, mr, mt);
    CVector theta(n);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
    for (int i = 0; i < n; ++i)
        theta(i) = std::polar(1.0, ang(rng));
    const CMatrix out = effective_channel(h, theta, g, hd);
    for (int r = 0; r < mr; ++r)
        for (int c = 0; c < mt; ++c)
        {
            cdouble acc = hd(r, c);
            for (int i = 0; i < n; ++i)
                acc += h(r, i) * theta(i) * g(i, c);
            EXPECT_NEAR(std::abs(out(r, c) - acc), 0.0, 1e-12 * std::max(1.0, std::abs(acc)));
        }
}

TEST(EffectiveChannel, DimensionMismatch)
{
    EXPECT_THROW(effective_channel(CMatrix::Zero(3, 4), CVector::Ones(3), CMatrix::Zero(4, 2), CMatrix::Zero(3, 2)),
                 std::invalid_argument);
}

TEST(EffectiveChannel, LinearInDirectAndPhases)
{
    Rng rng(4);
    const CMatrix h = standard_complex_gaussian(rng, 2, 3), g = standard_complex_gaussian(rng, 3, 2);
    const CMatrix hd1 = standard_complex_gaussian(rng, 2, 2), hd2 = standard_complex_gaussian(rng, 2, 2);
    const CVector t1 = standard_complex_gaussian(rng, 3, 1), t2 = standard_complex_gaussian(rng, 3, 1);
    const CMatrix lhs = effective_channel(h, t1 + t2, g, hd1 + hd2);
    const CMatrix rhs = effective_channel(h, t1, g, hd1) + effective_channel(h, t2, g, hd2);
    EXPECT_NEAR((lhs - rhs).norm(), 0.0, 1e-12);
}

TEST(ChannelGain, SingleAntenna)
{
    Rng rng(5);
    const CMatrix h = standard_complex_gaussian(rng, 4, 1);
    EXPECT_NEAR(channel_gain(h, Beamformer::single()), h.squaredNorm(), 1e-12);
}

TEST(ChannelGain, IdentityGram)
{
    for (double beta : {0.0, 1.0, 3.0})
        EXPECT_NEAR(gain_from_gram(CMatrix::Identity(2, 2), Beamformer::two(1.0, beta)), 2.0, 1e-14);
}

TEST(ChannelGain, ExpandedFormMatchesQuadraticForm)
{
    Rng rng(6);
    std::uniform_real_distribution<double> a(0.0, 4.0), b(0.0, 2.0 * pi);
    for (int trial = 0; trial < 1000; ++trial)
    {
        const CMatrix k = random_psd(rng, 2);
        const Beamformer f = Beamformer::two(a(rng), b(rng));
        const CVector v = f.vector();
        const double direct = (v.adjoint() * k * v)(0, 0).real();
        EXPECT_NEAR(gain_from_gram(k, f) / direct, 1.0, 1e-10);
    }
}

TEST(ChannelGain, MatchesNaiveProduct)
{
    Rng rng(7);
    const CMatrix h = standard_complex_gaussian(rng, 5, 2);
    const Beamformer f = Beamformer::two(0.7, 2.1);
    EXPECT_NEAR(channel_gain(h, f) / naive_gain(h, f), 1.0, 1e-10);
}

TEST(Beamformer, Validate)
{
    EXPECT_NO_THROW(Beamformer::two(0.0, 1.0).validate());
    EXPECT_THROW((Beamformer{{2.0, 1.0}, {0.0, 0.0}}).validate(), std::invalid_argument);
    EXPECT_THROW(Beamformer::two(-1.0, 0.0).validate(), std::invalid_argument);
}

namespace
{
    struct Cascade
    {
        CMatrix h_bar, g_bar, hd;
        CVector theta, f;
    };

    Cascade random_cascade(Rng &rng, bool with_direct)
    {
        Cascade c;
        c.h_bar = standard_complex_gaussian(rng, 4, 6);
        c.g_bar = standard_complex_gaussian(rng, 6, 2);
        c.hd = with_direct ? CMatrix(standard_complex_gaussian(rng, 4, 2)) : CMatrix(CMatrix::Zero(4, 2));
        c.theta = CVector(6);
        std::uniform_real_distribution<double> ang(0.0, 2.0 * pi);
        for (int i = 0; i < 6; ++i)
            c.theta(i) = std::polar(1.0, ang(rng));
        c.f = Beamformer::two(0.6, 1.3).vector();
        return c;
    }

    // True gain with the distance scaling sqrt(rho d^-k) applied to each hop
    double true_gain(const Cascade &c, double rho, double path_product)
    {
        const double s = rho / std::sqrt(path_product);
        return (effective_channel(s * c.h_bar, c.theta, c.g_bar, c.hd) * c.f).squaredNorm();
    }
}

TEST(GainDecomposition, NoDirectLink)
{
    Rng rng(8);
    const Cascade c = random_cascade(rng, false);
    const double rho = 0.0032, product = std::pow(70.0, 2.2) * std::pow(90.0, 2.2);
    const GainTerms t = gain_decomposition(c.h_bar, c.theta, c.g_bar, c.hd, c.f, rho);
    EXPECT_EQ(t.b, 0.0);
    EXPECT_NEAR(true_gain(c, rho, product) * product / t.a, 1.0, 1e-9);
}

TEST(GainDecomposition, UnitDistances)
{
    Rng rng(9);
    const Cascade c = random_cascade(rng, true);
    const double rho = 0.7;
    const GainTerms t = gain_decomposition(c.h_bar, c.theta, c.g_bar, c.hd, c.f, rho);
    EXPECT_NEAR((t.a + t.b + t.direct) / true_gain(c, rho, 1.0), 1.0, 1e-9);
    EXPECT_NEAR(t.gain(1.0), t.a + t.b + t.direct, 1e-12);
    const double product = 1234.5;
    EXPECT_NEAR(t.gain(product) / true_gain(c, rho, product), 1.0, 1e-9);
}

TEST(GainDecomposition, Homogeneity)
{
    Rng rng(10);
    const Cascade c = random_cascade(rng, true);
    const GainTerms t1 = gain_decomposition(c.h_bar, c.theta, c.g_bar, c.hd, c.f, 0.5);
    const GainTerms t2 = gain_decomposition(c.h_bar, c.theta, 2.0 * c.g_bar, c.hd, c.f, 0.5);
    EXPECT_NEAR(t2.a / t1.a, 4.0, 1e-12);
    EXPECT_NEAR(t2.b / t1.b, 2.0, 1e-12);
    EXPECT_NEAR(t2.direct, t1.direct, 1e-15);
}

TEST(Realization, SeededAndPrefixStable)
{
    Scenario s = default_scenario(3);
    s.params.num_subcarriers = 8;
    s.params.num_ris_elements = 6;
    s.params.rx_antennas = 4;
    s.params.num_slots = 2;
    s.params.flight_time = 30.0;
    const ChannelRealization a(s, 5), b(s, 5), c(s, 6);
    EXPECT_EQ(a.fingerprint(), b.fingerprint());
    EXPECT_NE(a.fingerprint(), c.fingerprint());
    const Vec3 q(0, 50, 100);
    EXPECT_EQ(a.g(2, 3, 1, q), b.g(2, 3, 1, q));

    // more ARIS elements keep the existing rows of G
    Scenario bigger = s;
    bigger.params.num_ris_elements = 9;
    const ChannelRealization d(bigger, 5);
    EXPECT_NEAR((d.g_bar(1, 2, 0, q).topRows(6) - a.g_bar(1, 2, 0, q)).norm(), 0.0, 1e-14);
    EXPECT_EQ(a.hd(1, 2, 0), d.hd(1, 2, 0));
}

TEST(Realization, ScaledChannelsMatchSynthesisFormula)
{
    Scenario s = default_scenario(4);
    s.params.num_subcarriers = 8;
    s.params.num_ris_elements = 5;
    s.params.rx_antennas = 3;
    const ChannelRealization ch(s, 0);
    const Vec3 q(10, -20, 100);
    const double du = (s.user_positions[0] - q).norm();
    EXPECT_NEAR(ch.g_scale(0, q), std::sqrt(s.params.los_pathloss_ref * std::pow(du, -s.params.ris_pathloss_exp1)),
                1e-15);
    EXPECT_NEAR((ch.g(0, 1, 2, q) - ch.g_scale(0, q) * ch.g_bar(0, 1, 2, q)).norm(), 0.0, 1e-15);
    EXPECT_NEAR((ch.h(1, 2, q) - ch.h_scale(q) * ch.h_bar(1, 2, q)).norm(), 0.0, 1e-15);
}

TEST(MatrixDump, RoundTrip)
{
    Rng rng(12);
    const CMatrix m = standard_complex_gaussian(rng, 3, 4);
    std::stringstream ss;
    write_matrix(ss, m);
    EXPECT_EQ(read_matrix(ss), m);
}
