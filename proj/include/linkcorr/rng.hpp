#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace linkcorr {

/// xoshiro256++ seeded through splitmix64.
///
/// Construction is a handful of integer ops, so callers derive one
/// independent stream per (seed, iteration, observation) tuple through
/// substream() instead of sharing a generator across threads. Satisfies
/// UniformRandomBitGenerator, so the <random> distributions work on it.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0);

    /// Stream keyed by a seed and a path of indices. Distinct paths give
    /// statistically independent streams; the mapping is platform independent.
    static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    double normal();
    double uniform();  // [0, 1)
    /// Chi-squared draw; fractional degrees of freedom are fine.
    double chi_squared(double dof);

private:
    std::array<std::uint64_t, 4> state_{};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer, exposed for hashing seeds together.
std::uint64_t mix64(std::uint64_t x);

}  // namespace linkcorr
