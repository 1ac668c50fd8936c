#pragma once

#include <cstdint>
#include <random>

namespace manet {

/// Seeded 64-bit generator with distribution code written out by hand, so
/// that draws are identical across standard library implementations.
class Rng
{
  public:
    Rng() = default;

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        engine_.seed(seq);
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    bool coin(double p) { return uniform() < p; }

  private:
    std::mt19937_64 engine_{0};
};

} // namespace manet
