#pragma once

#include <cstdint>
#include <limits>

namespace relayharq {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/**
 * Counter-based 64-bit generator (SplitMix64).
 *
 * The state is a Weyl counter; every output is mix64(counter). Substreams are
 * derived deterministically from a parent seed and an index, so a trial's
 * randomness depends only on (seed, trial index) and never on which worker
 * thread runs it:
 *
 *     substream(seed, index).state = mix64(seed ^ mix64(index + kGamma))
 *
 * Satisfies UniformRandomBitGenerator.
 */
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    explicit constexpr SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    static constexpr SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept
    {
        return SplitMix64(mix64(seed ^ mix64(index + kGamma)));
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        state_ += kGamma;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t state() const noexcept { return state_; }

    friend constexpr bool operator==(const SplitMix64&, const SplitMix64&) = default;

private:
    std::uint64_t state_;
};

/// Folds a sequence of 64-bit words into one stream seed.
constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t word) noexcept
{
    return mix64(seed ^ mix64(word + SplitMix64::kGamma));
}

} // namespace relayharq
