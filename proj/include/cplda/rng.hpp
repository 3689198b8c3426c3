#pragma once

#include <cstdint>

namespace cplda {

/// xoshiro256** seeded through SplitMix64.
///
/// Normal draws use Box-Muller on the generator's own uniforms, so streams
/// are identical on every platform for a given seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent stream for replication/worker `index`: seed ⊕ (index · odd constant).
    static Rng substream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    double normal() noexcept;

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

inline constexpr std::uint64_t kStreamConstant = 0x9E3779B97F4A7C15ULL;

} // namespace cplda
