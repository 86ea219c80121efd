#pragma once

#include <cmath>
#include <cstdint>

namespace dualstop {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based random stream (SplitMix64 output function over a keyed
/// counter). Streams form a tree: child(i) derives an independent key from
/// (key, i), so a master seed plus a path of indices identifies every stream
/// regardless of which thread consumes it.
class RandomStream {
public:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    constexpr RandomStream() noexcept = default;
    explicit constexpr RandomStream(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    [[nodiscard]] constexpr RandomStream child(std::uint64_t index) const noexcept
    {
        RandomStream s;
        s.key_ = mix64(key_ ^ mix64(index * kGolden + 0x632be59bd9b4e019ULL));
        return s;
    }

    constexpr std::uint64_t next() noexcept { return mix64(key_ + (++counter_) * kGolden); }

    /// Uniform on [0,1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1].
    double uniform_open0() noexcept { return 1.0 - uniform(); }

    double exponential() noexcept { return -std::log(uniform_open0()); }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }

    // UniformRandomBitGenerator
    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept { return next(); }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace dualstop
