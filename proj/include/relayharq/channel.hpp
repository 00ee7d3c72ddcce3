#pragma once

#include "relayharq/rng.hpp"

#include <optional>
#include <vector>

namespace relayharq {

/// Scenario statistics shared by every link: equal mean gain and SNR on all
/// source-relay and relay-destination channels.
class FadingParams {
public:
    /// Throws std::invalid_argument unless avg_gain, snr, rate > 0 and max_attempts >= 1.
    FadingParams(double avg_gain, double snr, double rate, int max_attempts);

    double avg_gain() const noexcept { return avg_gain_; }
    double snr() const noexcept { return snr_; }
    double rate() const noexcept { return rate_; }
    int max_attempts() const noexcept { return max_attempts_; }

    friend bool operator==(const FadingParams&, const FadingParams&) = default;

private:
    double avg_gain_;
    double snr_;
    double rate_;
    int max_attempts_;
};

/// Power gain |h|^2 of one block-fading link.
struct ChannelGain {
    double gain_sq = 0.0;
};

/// Required attempt count; std::nullopt marks a link that cannot deliver
/// within max_attempts.
using Attempts = std::optional<int>;
inline constexpr Attempts kInfeasible = std::nullopt;

/// Distribution of the required attempt count of one link.
struct AttemptPmf {
    std::vector<double> probs; ///< probs[n - 1] = P{N = n}, n = 1..M
    double tail = 0.0;         ///< P{N > M}

    int max_attempts() const noexcept { return static_cast<int>(probs.size()); }
    double at(int n) const { return probs.at(static_cast<std::size_t>(n - 1)); }
    double feasible_mass() const noexcept;
};

/// Row-major M x M joint distribution of (source-link, relay-link) attempts.
class JointPmf {
public:
    explicit JointPmf(const AttemptPmf& marginal);
    JointPmf(int max_attempts, std::vector<double> entries);

    int max_attempts() const noexcept { return max_attempts_; }
    /// 1-based attempt counts.
    double operator()(int i, int j) const
    {
        return entries_[static_cast<std::size_t>((i - 1) * max_attempts_ + (j - 1))];
    }
    double total() const noexcept;
    const std::vector<double>& entries() const noexcept { return entries_; }

private:
    int max_attempts_;
    std::vector<double> entries_;
};

double db_to_linear(double db) noexcept;
double linear_to_db(double linear) noexcept;

/// Exponential |h|^2 with mean avg_gain (Rayleigh amplitude). Consumes one draw.
ChannelGain sample_gain_sq(const FadingParams& params, SplitMix64& rng) noexcept;

/// log2(1 + snr |h|^2), bits per symbol.
double mutual_info_per_symbol(const FadingParams& params, ChannelGain g) noexcept;

/// ceil(rate / MI) if it does not exceed max_attempts, else kInfeasible.
/// Zero MI is infeasible.
Attempts required_attempts(const FadingParams& params, ChannelGain g) noexcept;

/// P{N = n} = exp(-(2^{R/n}-1)/(avg_gain snr)) - exp(-(2^{R/(n-1)}-1)/(avg_gain snr)),
/// with the second term taken as 0 for n = 1.
AttemptPmf attempt_pmf(const FadingParams& params);

/// P{N <= n} = exp(-(2^{R/n}-1)/(avg_gain snr)).
double attempt_cdf(const FadingParams& params, int n) noexcept;

JointPmf joint_pmf(const FadingParams& params);

} // namespace relayharq
