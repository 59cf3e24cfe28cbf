#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace revlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A generator is identified by a 64-bit seed (the Philox key) and a 64-bit
/// stream id (the upper half of the counter). Distinct streams of the same seed
/// never overlap, so every chain, trajectory, or path owns a stream derived as
/// (seed, stream index) and results do not depend on scheduling.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// The raw bijection; exposed for known-answer tests.
    static Block encrypt(Block counter, Key key) noexcept;

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_index_ = 0;
    Block buffer_{};
    unsigned used_ = 4;
};

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Philox4x32& rng) noexcept;

/// Uniform double in (0, 1]; safe as a logarithm argument.
double uniform01_open_low(Philox4x32& rng) noexcept;

/// Standard normal deviate (Box-Muller, no cached second value).
double standard_normal(Philox4x32& rng) noexcept;

/// Uniform integer in [0, n).
std::uint64_t uniform_index(Philox4x32& rng, std::uint64_t n) noexcept;

/// Exponential deviate with the given rate.
double exponential(Philox4x32& rng, double rate) noexcept;

}  // namespace revlab
