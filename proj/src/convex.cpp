// SPDX-License-Identifier: Apache-2.0

#include "aris/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aris
{
    namespace
    {
        // Step in (0, 1] keeping S + a*D positive definite: the full step when it stays
        // inside the cone with room to spare, otherwise backtracking on Cholesky tests.
        double psd_step(const CMatrix &s, const CMatrix &d)
        {
            double a = 1.0;
            for (int k = 0; k < 60; ++k, a *= 0.8)
            {
                // testing a / 0.95 keeps the accepted point away from the boundary
                Eigen::LLT<CMatrix> chol(s + (a / 0.95) * d);
                if (chol.info() == Eigen::Success)
                    return a;
            }
            return 0.0;
        }
    }

    SdpResult solve_sdp(const CMatrix &r_in, const SdpOptions &opts)
    {
        const int n = static_cast<int>(r_in.rows());
        if (r_in.cols() != n || n == 0)
            throw std::invalid_argument("solve_sdp: R must be square and non-empty");
        if (n > opts.max_dim)
            throw std::invalid_argument("solve_sdp: problem exceeds max_dim");
        const double rnorm = r_in.norm();
        if ((r_in - r_in.adjoint()).norm() > 1e-12 * std::max(1.0, rnorm))
            throw std::invalid_argument("solve_sdp: R is not Hermitian");
        const CMatrix r = (r_in + r_in.adjoint()) / 2.0;

        CMatrix x = CMatrix::Identity(n, n);
        const double margin = rnorm > 0.0 ? rnorm / n : 1.0;
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i)
            y(i) = r.row(i).cwiseAbs().sum() + margin;
        CMatrix z = -r;
        z.diagonal() += y.cast<cdouble>();

        SdpResult res;
        double sigma = 0.3;
        for (int it = 0; it < opts.max_iter; ++it)
        {
            const double value = (r.cwiseProduct(x.conjugate())).sum().real(); // tr(R X) for Hermitian X
            const double gap = (x.cwiseProduct(z.conjugate())).sum().real();
            res.iterations = it;
            if (gap <= opts.tol * (1.0 + std::abs(value)))
            {
                res.x = x;
                res.y = y;
                res.value = value;
                res.gap = gap;
                return res;
            }
            const double mu = sigma * gap / n;

            Eigen::LLT<CMatrix> zchol(z);
            Eigen::LLT<CMatrix> xchol(x);
            if (zchol.info() != Eigen::Success || xchol.info() != Eigen::Success)
            {
                std::ostringstream msg;
                msg << "solve_sdp: lost positive definiteness at iteration " << it << " (gap " << gap << ")";
                throw SolverError(msg.str());
            }
            const CMatrix zi = zchol.solve(CMatrix::Identity(n, n));
            const Eigen::MatrixXd m = x.cwiseProduct(zi.conjugate()).real();
            const Eigen::VectorXd rhs = mu * zi.diagonal().real() - Eigen::VectorXd::Ones(n);
            Eigen::LLT<Eigen::MatrixXd> mchol(m);
            if (mchol.info() != Eigen::Success)
                throw SolverError("solve_sdp: singular Schur complement");
            const Eigen::VectorXd dy = mchol.solve(rhs);

            CMatrix dx = mu * zi - x - x * dy.cast<cdouble>().asDiagonal() * zi;
            dx = (dx + dx.adjoint()).eval() / 2.0;
            dx.diagonal().setZero();
            const CMatrix dz = dy.cast<cdouble>().asDiagonal();

            const double ap = psd_step(x, dx);
            const double ad = psd_step(z, dz);
            x += ap * dx;
            x.diagonal().setOnes();
            y += ad * dy;
            z = -r;
            z.diagonal() += y.cast<cdouble>();
            sigma = std::min(ap, ad) > 0.8 ? 0.1 : 0.3;
        }
        std::ostringstream msg;
        msg << "solve_sdp: no convergence in " << opts.max_iter << " iterations";
        throw ConvergenceError(msg.str());
    }

    namespace
    {
        struct Dense
        {
            double value;
            Eigen::VectorXd grad;
            Eigen::MatrixXd hess;
        };

        void scatter(const SparseEval &e, double w, Eigen::VectorXd &g, Eigen::MatrixXd *h)
        {
            for (const auto &[i, v] : e.grad)
                g(i) += w * v;
            if (h)
            {
                for (const auto &[i, j, v] : e.hess)
                {
                    (*h)(i, j) += w * v;
                    if (i != j)
                        (*h)(j, i) += w * v;
                }
            }
        }

        class Barrier
        {
        public:
            Barrier(const ConvexProgram &p) : p_(p) {}

            // phi = t f0 - sum log(-f_i); returns +inf outside the domain
            double value(const Eigen::VectorXd &x, double t) const
            {
                // constraints first: most rejected line-search points leave the domain
                double phi = 0.0;
                for (const auto &fi : p_.inequalities)
                {
                    const double v = fi(x, false).value;
                    if (!(v < 0.0))
                        return std::numeric_limits<double>::infinity();
                    phi -= std::log(-v);
                }
                const double f0 = p_.objective(x, false).value;
                if (!std::isfinite(f0))
                    return std::numeric_limits<double>::infinity();
                return phi + t * f0;
            }

            Dense derivatives(const Eigen::VectorXd &x, double t) const
            {
                const int n = p_.dim;
                Dense d{0.0, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
                const SparseEval f0 = p_.objective(x, true);
                d.value = t * f0.value;
                scatter(f0, t, d.grad, &d.hess);
                for (const auto &fi : p_.inequalities)
                {
                    const SparseEval e = fi(x, true);
                    const double s = -e.value;
                    d.value -= std::log(s);
                    for (const auto &[i, vi] : e.grad)
                    {
                        d.grad(i) += vi / s;
                        for (const auto &[j, vj] : e.grad)
                            d.hess(i, j) += vi * vj / (s * s);
                    }
                    for (const auto &[i, j, v] : e.hess)
                    {
                        d.hess(i, j) += v / s;
                        if (i != j)
                            d.hess(j, i) += v / s;
                    }
                }
                return d;
            }

        private:
            const ConvexProgram &p_;
        };
    }

    ConvexResult solve_convex_program(const ConvexProgram &program, const Eigen::VectorXd &x0, const BarrierOptions &opts)
    {
        const int n = program.dim;
        const int m = static_cast<int>(program.inequalities.size());
        const int pe = static_cast<int>(program.eq_a.rows());
        if (x0.size() != n)
            throw std::invalid_argument("solve_convex_program: x0 has the wrong dimension");
        for (int i = 0; i < m; ++i)
        {
            const double v = program.inequalities[i](x0, false).value;
            if (!(v < 0.0))
            {
                std::ostringstream msg;
                msg << "solve_convex_program: start violates inequality " << i << " (value " << v << ")";
                throw SolverError(msg.str());
            }
        }
        if (pe > 0 && (program.eq_a * x0 - program.eq_b).norm() > 1e-9 * (1.0 + program.eq_b.norm()))
            throw SolverError("solve_convex_program: start violates the equality constraints");

        const Barrier barrier(program);
        Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);
        if (pe > 0)
        {
            // orthonormal null-space basis
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(program.eq_a, Eigen::ComputeFullV);
            svd.setThreshold(1e-12);
            const int r = static_cast<int>(svd.rank());
            z = svd.matrixV().rightCols(n - r);
        }
        Eigen::VectorXd x = x0;
        const double f_start = program.objective(x, false).value;
        if (!std::isfinite(f_start))
            throw SolverError("solve_convex_program: objective not finite at start");
        double t = opts.t0 > 0.0 ? opts.t0 : (m > 0 ? m / std::max(std::abs(f_start), 1.0) : 1.0);

        ConvexResult res;
        for (int outer = 0; outer < opts.max_outer; ++outer)
        {
            // centering
            for (int it = 0; it < opts.max_newton; ++it)
            {
                const Dense d = barrier.derivatives(x, t);
                // Newton step restricted to the null space of eq_a
                const Eigen::MatrixXd hz = z.transpose() * d.hess * z;
                const Eigen::VectorXd gz = z.transpose() * d.grad;
                Eigen::LDLT<Eigen::MatrixXd> ldlt(hz);
                Eigen::VectorXd step = ldlt.solve(-gz);
                if (ldlt.info() != Eigen::Success || !step.allFinite())
                    step = (hz + 1e-12 * (1.0 + hz.diagonal().cwiseAbs().maxCoeff()) *
                                     Eigen::MatrixXd::Identity(hz.rows(), hz.cols()))
                               .ldlt()
                               .solve(-gz);
                const Eigen::VectorXd dx = z * step;
                ++res.newton_iterations;
                const double slope = d.grad.dot(dx);
                if (!(slope < 0.0) || -slope / 2.0 <= opts.newton_tol)
                    break;
                double s = 1.0;
                double phi_new = barrier.value(x + dx, t);
                int tries = 0;
                while (!(phi_new <= d.value + opts.alpha * s * slope) && tries < 200)
                {
                    s *= opts.beta;
                    phi_new = barrier.value(x + s * dx, t);
                    ++tries;
                }
                if (tries == 200)
                    break;
                x += s * dx;
            }
            if (m == 0 || m / t < opts.tol)
                break;
            t *= opts.mu;
        }

        res.x = x;
        res.value = program.objective(x, false).value;
        res.gap = m > 0 ? m / t : 0.0;
        res.ineq_multipliers.resize(m);
        Eigen::VectorXd stat = Eigen::VectorXd::Zero(n);
        scatter(program.objective(x, true), 1.0, stat, nullptr);
        for (int i = 0; i < m; ++i)
        {
            const SparseEval e = program.inequalities[i](x, true);
            res.ineq_multipliers(i) = 1.0 / (-t * e.value);
            scatter(e, res.ineq_multipliers(i), stat, nullptr);
        }
        if (pe > 0)
        {
            const Eigen::MatrixXd at = program.eq_a.transpose();
            res.eq_multipliers = at.completeOrthogonalDecomposition().solve(-stat);
            stat += at * res.eq_multipliers;
        }
        res.kkt_residual = stat.norm();
        return res;
    }

    Eigen::VectorXd newton_solve(const VectorFunction &f, const JacobianFunction &jac, const Eigen::VectorXd &x0,
                                 const NewtonOptions &opts)
    {
        Eigen::VectorXd x = x0;
        Eigen::VectorXd fx = f(x);
        for (int it = 0; it < opts.max_iter; ++it)
        {
            const double norm = fx.norm();
            if (!std::isfinite(norm))
                throw ConvergenceError("newton_solve: residual is not finite");
            if (norm <= opts.tol)
                return x;
            const Eigen::VectorXd dx = jac(x).fullPivLu().solve(-fx);
            if (!dx.allFinite())
                throw ConvergenceError("newton_solve: singular Jacobian");
            double s = 1.0;
            bool improved = false;
            for (int h = 0; h <= opts.max_halvings; ++h, s /= 2.0)
            {
                const Eigen::VectorXd trial = x + s * dx;
                const Eigen::VectorXd ft = f(trial);
                if (ft.allFinite() && ft.norm() < norm)
                {
                    x = trial;
                    fx = ft;
                    improved = true;
                    break;
                }
            }
            if (!improved)
                throw ConvergenceError("newton_solve: damping failed to reduce the residual");
        }
        if (fx.norm() <= opts.tol)
            return x;
        throw ConvergenceError("newton_solve: iteration limit reached");
    }

    double bisect(const std::function<double(double)> &f, double lo, double hi, double tol, int max_iter)
    {
        double flo = f(lo), fhi = f(hi);
        if (flo == 0.0)
            return lo;
        if (fhi == 0.0)
            return hi;
        if ((flo > 0.0) == (fhi > 0.0))
            throw SolverError("bisect: no sign change on the bracket");
        for (int it = 0; it < max_iter; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            if (hi - lo <= tol || mid == lo || mid == hi)
                return mid;
            const double fm = f(mid);
            if (fm == 0.0)
                return mid;
            if ((fm > 0.0) == (flo > 0.0))
                lo = mid, flo = fm;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }
}
