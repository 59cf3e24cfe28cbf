#include "revlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace revlab {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
    : seed_(seed), stream_(stream) {}

Philox4x32::Block Philox4x32::encrypt(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

void Philox4x32::refill() noexcept {
    const Block counter{static_cast<std::uint32_t>(block_index_),
                        static_cast<std::uint32_t>(block_index_ >> 32),
                        static_cast<std::uint32_t>(stream_),
                        static_cast<std::uint32_t>(stream_ >> 32)};
    const Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    buffer_ = encrypt(counter, key);
    ++block_index_;
    used_ = 0;
}

Philox4x32::result_type Philox4x32::operator()() noexcept {
    if (used_ == 4) refill();
    return buffer_[used_++];
}

double uniform01(Philox4x32& rng) noexcept {
    const std::uint64_t hi = rng() >> 5;  // 27 bits
    const std::uint64_t lo = rng() >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * 0x1.0p-53;
}

double uniform01_open_low(Philox4x32& rng) noexcept { return 1.0 - uniform01(rng); }

double standard_normal(Philox4x32& rng) noexcept {
    const double u1 = uniform01_open_low(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t uniform_index(Philox4x32& rng, std::uint64_t n) noexcept {
    if (n <= 1) return 0;
    // Rejection on a 64-bit draw keeps the result unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    for (;;) {
        const std::uint64_t x = (static_cast<std::uint64_t>(rng()) << 32) | rng();
        if (x < limit) return x % n;
    }
}

double exponential(Philox4x32& rng, double rate) noexcept {
    return -std::log(uniform01_open_low(rng)) / rate;
}

}  // namespace revlab
