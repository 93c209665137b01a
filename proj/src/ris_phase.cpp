// SPDX-License-Identifier: Apache-2.0

#include "aris/ris_phase.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace aris
{
    double quad_transform_y(double c, double gain)
    {
        if (!(gain > 0.0))
            throw InfeasibleError("quadratic transform: zero link gain");
        return c / gain;
    }

    double term_gain(const PhaseTerm &t, const CVector &theta)
    {
        if (theta.size() == 0)
            return t.hd.squaredNorm();
        return (t.h * t.g.cwiseProduct(theta) + t.hd).squaredNorm();
    }

    double phase_objective(const std::vector<PhaseTerm> &terms, const CVector &theta)
    {
        double sum = 0.0;
        for (const auto &t : terms)
        {
            const double g = term_gain(t, theta);
            if (!(g > 0.0))
                return std::numeric_limits<double>::infinity();
            sum += t.c * t.c / g;
        }
        return sum;
    }

    CMatrix lifting_block_a(const PhaseTerm &t)
    {
        const CMatrix hg = t.h * t.g.asDiagonal();
        return hg.adjoint() * hg;
    }

    CVector lifting_block_b(const PhaseTerm &t) { return t.g.conjugate().cwiseProduct(t.h.adjoint() * t.hd); }

    CMatrix build_lifting_matrix(const std::vector<PhaseTerm> &terms, const std::vector<double> &y)
    {
        if (terms.size() != y.size())
            throw std::invalid_argument("build_lifting_matrix: one y per term required");
        if (terms.empty())
            throw std::invalid_argument("build_lifting_matrix: no terms");
        const Eigen::Index n = terms.front().g.size();
        CMatrix r = CMatrix::Zero(n + 1, n + 1);
        for (std::size_t k = 0; k < terms.size(); ++k)
        {
            const auto &t = terms[k];
            if (t.g.size() != n || t.h.cols() != n || t.h.rows() != t.hd.size())
                throw std::invalid_argument("build_lifting_matrix: dimension mismatch");
            const double w = y[k] * y[k];
            r.topLeftCorner(n, n) += w * lifting_block_a(t);
            const CVector b = w * lifting_block_b(t);
            r.topRightCorner(n, 1) += b;
            r.bottomLeftCorner(1, n) += b.adjoint();
        }
        return (r + r.adjoint()) / 2.0;
    }

    CVector gaussian_randomization(const CMatrix &x, const CMatrix &r, int samples, Rng &rng)
    {
        const Eigen::Index n1 = x.rows();
        Eigen::SelfAdjointEigenSolver<CMatrix> eig(x);
        Eigen::VectorXd d = eig.eigenvalues();
        for (Eigen::Index i = 0; i < d.size(); ++i)
        {
            if (d(i) < -1e-9)
            {
                std::ostringstream msg;
                msg << "gaussian_randomization: matrix is not PSD (eigenvalue " << d(i) << ")";
                throw SolverError(msg.str());
            }
            d(i) = std::max(d(i), 0.0);
        }
        // round-off eigenvalues of a numerically low-rank X would otherwise leak into every draw
        const double dmax = d.size() > 0 ? d.maxCoeff() : 0.0;
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (d(i) <= 1e-12 * dmax)
                d(i) = 0.0;
        const CMatrix factor = eig.eigenvectors() * d.cwiseSqrt().cast<cdouble>().asDiagonal();
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));

        CVector best;
        double best_value = -std::numeric_limits<double>::infinity();
        CVector r_draw(n1), cand(n1);
        int drawn = 0, attempts = 0;
        while (drawn < samples)
        {
            if (++attempts > 100 * samples + 100)
                throw SolverError("gaussian_randomization: degenerate last component in every sample");
            for (Eigen::Index i = 0; i < n1; ++i)
            {
                const double re = nd(rng);
                r_draw(i) = cdouble(re, nd(rng));
            }
            const CVector bar = factor * r_draw;
            const cdouble last = bar(n1 - 1);
            if (std::abs(last) < 1e-9)
                continue;
            ++drawn;
            for (Eigen::Index i = 0; i + 1 < n1; ++i)
                cand(i) = std::polar(1.0, std::arg(bar(i) / last));
            cand(n1 - 1) = 1.0;
            const double v = cand.dot(r * cand).real();
            if (v > best_value)
            {
                best_value = v;
                best = cand;
            }
        }
        return best.head(n1 - 1);
    }

    PhaseResult optimize_phases(const std::vector<PhaseTerm> &terms, const CVector &theta0, Rng &rng,
                                const PhaseOptions &opts)
    {
        PhaseResult res;
        res.theta = theta0;
        res.objective_before = phase_objective(terms, theta0);
        res.objective_after = res.objective_before;
        if (theta0.size() == 0 || terms.empty())
            return res;

        std::vector<double> y(terms.size());
        auto update_y = [&](const CVector &theta)
        {
            for (std::size_t k = 0; k < terms.size(); ++k)
            {
                const double g = term_gain(terms[k], theta);
                y[k] = g > 0.0 ? terms[k].c / g : 0.0;
            }
        };
        update_y(res.theta);

        for (int round = 0; round < opts.max_rounds; ++round)
        {
            ++res.rounds;
            CMatrix r = build_lifting_matrix(terms, y);
            const double scale = r.norm();
            if (scale > 0.0)
                r /= scale;
            SdpResult sdp;
            try
            {
                ++res.sdp_solves;
                sdp = solve_sdp(r, opts.sdp);
            }
            catch (const SolverError &)
            {
                res.sdp_failed = true;
                break;
            }
            const CVector cand = gaussian_randomization(sdp.x, r, opts.gr_samples, rng);
            const double value = phase_objective(terms, cand);
            if (!(value <= res.objective_after))
                break;
            res.theta = cand;
            res.objective_after = value;

            const Eigen::Map<const Eigen::VectorXd> y_old(y.data(), static_cast<Eigen::Index>(y.size()));
            const Eigen::VectorXd prev = y_old;
            update_y(res.theta);
            if ((y_old - prev).norm() <= opts.eps2 * std::max(prev.norm(), 1e-300))
                break;
        }
        return res;
    }
}
