#pragma once

#include <cstdint>
#include <random>

namespace gqslab
{

std::uint64_t splitmix64(std::uint64_t x);

/// Per-run seed derived from a base seed and a run index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Seeded random source. Draws are reproducible for a given build.
class Rng
{
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    /// Uniform integer in [lo, hi].
    std::int64_t uniform(std::int64_t lo, std::int64_t hi)
    {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    /// Uniform real in [lo, hi).
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    double exponential(double mean) { return std::exponential_distribution<double>(1.0 / mean)(engine_); }
    bool chance(double p) { return std::bernoulli_distribution(p)(engine_); }
    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace gqslab
