#pragma once

#include <cstdint>

namespace gridrep {

/// Deterministic 64-bit generator: xoshiro256** seeded through SplitMix64.
///
/// The stream depends only on the seed, so every platform produces the same
/// sequence. Real-valued draws are derived from the integer stream with fixed
/// formulas (53-bit mantissa uniforms, Box-Muller normals). Version 1 of the
/// stream; any change to the algorithm must bump kStreamVersion.
class SeededRng {
public:
    static constexpr int kStreamVersion = 1;

    explicit SeededRng(std::uint64_t seed = 0);

    std::uint64_t next_u64();

    /// Uniform on [0, 1).
    double uniform();

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal.
    double normal();

    /// Uniform integer on [0, bound). bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Independent child stream derived from the current state and a tag.
    SeededRng split(std::uint64_t tag);

private:
    std::uint64_t s_[4];
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gridrep
