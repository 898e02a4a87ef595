#pragma once

#include <cstdint>
#include <initializer_list>

namespace circsync {

/// SplitMix64 finalizer. Bijective 64-bit mix used for seeding and stream derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives a 64-bit key from a master seed and an ordered list of stream indices.
/// The same (seed, keys...) always yields the same value on every platform.
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept;

/// Maps the top 53 bits of `bits` to a double in [0, 1).
double to_unit(std::uint64_t bits) noexcept;

/// xoshiro256** generator seeded through SplitMix64.
///
/// Portable by construction: all distributions used by the library are
/// derived from raw 64-bit outputs here rather than from <random>
/// distributions, whose results differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    /// Generator for the substream (seed, keys...).
    static Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept;

    std::uint64_t next_u64() noexcept;
    double uniform() noexcept;
    double uniform(double lo, double hi) noexcept;
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;

private:
    std::uint64_t s_[4];
};

}  // namespace circsync
