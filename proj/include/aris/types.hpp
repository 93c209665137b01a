// SPDX-License-Identifier: Apache-2.0
//
// Common numeric aliases and error types shared by all modules.

#ifndef ARIS_TYPES_HPP
#define ARIS_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace aris
{
    using cdouble = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using Vec3 = Eigen::Vector3d;
    using Rng = std::mt19937_64;

    inline constexpr double pi = 3.14159265358979323846;

    // Malformed or inconsistent configuration input
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // A rate target cannot be met within the power budget, or a link has zero gain
    class InfeasibleError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Numerical breakdown inside one of the in-house solvers
    class SolverError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Iterative method ran out of iterations
    class ConvergenceError : public SolverError
    {
    public:
        using SolverError::SolverError;
    };

    // Splittable seed derivation (splitmix64 finalizer chained over the tags).
    inline std::uint64_t mix_seed(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    }

    template <typename... Tags>
    std::uint64_t derive_seed(std::uint64_t master, Tags... tags)
    {
        std::uint64_t s = mix_seed(master);
        ((s = mix_seed(s ^ static_cast<std::uint64_t>(tags))), ...);
        return s;
    }

    // Stream tags used with derive_seed
    enum class StreamTag : std::uint64_t
    {
        users = 1,
        user_ris = 2,
        ris_bs = 3,
        direct = 4,
        randomization = 5,
        random_phases = 6,
    };

    inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }
}

#endif
