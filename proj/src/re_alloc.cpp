// SPDX-License-Identifier: Apache-2.0

#include "aris/re_alloc.hpp"
#include "aris/types.hpp"

#include <algorithm>
#include <cmath>

namespace aris
{
    int AllocationMatrix::count(int u) const { return static_cast<int>(std::count(owner.begin(), owner.end(), u)); }

    std::vector<int> AllocationMatrix::elements_of(int u) const
    {
        std::vector<int> out;
        for (int n = 0; n < subcarriers(); ++n)
            if (owner[n] == u)
                out.push_back(n);
        return out;
    }

    double ranking_metric(double rate, double d_ur, double d_rb, double k1, double k2, double bandwidth)
    {
        return std::expm1(rate / bandwidth * std::log(2.0)) * std::pow(d_ur, k1) * std::pow(d_rb, k2);
    }

    AllocationMatrix allocate(const std::vector<double> &rates, const std::vector<double> &d_ur, double d_rb, double k1,
                              double k2, double bandwidth, int subcarriers)
    {
        const int users = static_cast<int>(rates.size());
        if (static_cast<int>(d_ur.size()) != users)
            throw std::invalid_argument("allocate: one distance per user required");
        if (subcarriers < users)
            throw InfeasibleError("allocate: fewer resource elements than users");
        AllocationMatrix a(users, subcarriers);
        if (users == 0)
            return a;
        std::vector<int> held(users, 1);
        for (int u = 0; u < users; ++u)
            a.owner[u] = u;
        for (int n = users; n < subcarriers; ++n)
        {
            int best = 0;
            double best_metric = -1.0;
            for (int u = 0; u < users; ++u)
            {
                const double m = ranking_metric(rates[u] / held[u], d_ur[u], d_rb, k1, k2, bandwidth);
                if (m > best_metric)
                {
                    best_metric = m;
                    best = u;
                }
            }
            a.owner[n] = best;
            ++held[best];
        }
        return a;
    }
}
