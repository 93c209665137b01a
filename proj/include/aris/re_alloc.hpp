// SPDX-License-Identifier: Apache-2.0
//
// Greedy resource-element assignment driven by a rate / path-loss ranking metric.

#ifndef ARIS_RE_ALLOC_HPP
#define ARIS_RE_ALLOC_HPP

#include <vector>

namespace aris
{
    // One slot's assignment: owner[n] is the user holding RE n, or -1.
    struct AllocationMatrix
    {
        int users = 0;
        std::vector<int> owner;

        AllocationMatrix() = default;
        AllocationMatrix(int u, int subcarriers) : users(u), owner(subcarriers, -1) {}

        int subcarriers() const { return static_cast<int>(owner.size()); }
        bool active(int u, int n) const { return owner[n] == u; }
        int count(int u) const;
        std::vector<int> elements_of(int u) const;

        bool operator==(const AllocationMatrix &) const = default;
    };

    // (2^(r/w) - 1) * d_uR^k1 * d_RB^k2
    double ranking_metric(double rate, double d_ur, double d_rb, double k1, double k2, double bandwidth);

    // Seeds RE u to user u, then gives each remaining RE (in index order) to the user with
    // the largest metric at rate r_u / (REs held); ties go to the lowest user index.
    // Throws InfeasibleError when subcarriers < users.
    AllocationMatrix allocate(const std::vector<double> &rates, const std::vector<double> &d_ur, double d_rb, double k1,
                              double k2, double bandwidth, int subcarriers);
}

#endif
