#pragma once

#include "relayharq/channel.hpp"
#include "relayharq/policy.hpp"
#include "relayharq/rng.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace relayharq {

enum class Scheme { kProposed = 0, kFdfr = 1, kOptimal = 2 };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme) noexcept;

/// One relay's view of a HARQ round. Time is measured in transmission
/// intervals; beta is the sub-interval collision-avoidance offset.
struct RelayNode {
    int id = 0;
    Attempts src_attempts;
    Attempts dst_attempts;
    double beta = 0.0;

    bool eligible() const noexcept { return src_attempts.has_value() && dst_attempts.has_value(); }
};

struct RoundOutcome {
    Scheme scheme = Scheme::kProposed;
    bool feasible = false;
    std::optional<int> winner_id;
    int takeover_slot = 0;
    int winner_src_attempts = 0;
    int winner_dst_attempts = 0;
    int delay_slots = 0;   ///< takeover_slot + winner_dst_attempts
    int attempt_total = 0; ///< winner_src_attempts + winner_dst_attempts

    friend bool operator==(const RoundOutcome&, const RoundOutcome&) = default;
};

/// JSON-lines trace record; unset counters of an infeasible round are null.
nlohmann::json to_json(const RoundOutcome& outcome);

/// Eligible relays fire at alpha(i, j) + beta; the earliest takes over and
/// the rest sense the busy resource block and drop out.
RoundOutcome run_round_proposed(std::span<const RelayNode> relays, const AlphaMatrix& alpha);

/// Eligible relays fire at i + beta, i.e. as soon as they decode. When
/// exclusive_relay_cap is set, only relays with j below it take part.
RoundOutcome run_round_fdfr(std::span<const RelayNode> relays, std::optional<int> exclusive_relay_cap = std::nullopt);

/// Genie selection of the eligible relay with the smallest i + j (ties by
/// beta). It takes over at its decode slot i.
RoundOutcome run_round_optimal(std::span<const RelayNode> relays);

/// Draws both hops of every relay and its beta, in relay order
/// (source gain, destination gain, beta).
std::vector<RelayNode> draw_relays(const FadingParams& params, int num_relays, double beta_max, SplitMix64& rng);

struct SimConfig {
    FadingParams params;
    int num_relays = 1;
    std::optional<AlphaMatrix> alpha; ///< required by Scheme::kProposed
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    double beta_max = 0.01;
    ThroughputForm throughput_form = ThroughputForm::kMultiplyRate;
    bool fdfr_strict_relay_cap = false;

    /// Throws std::invalid_argument.
    void validate(Scheme scheme) const;
};

/// Trial t draws from SplitMix64::substream(config.seed, t).
RoundOutcome simulate_round(const SimConfig& config, Scheme scheme, std::uint64_t trial);

struct TrialSummary {
    std::uint64_t trials = 0;
    std::uint64_t feasible_rounds = 0;
    // Exact integer sums over feasible rounds; merging is order independent.
    std::uint64_t delay_sum = 0;
    std::uint64_t delay_sq_sum = 0;
    std::uint64_t attempt_sum = 0;
    std::uint64_t attempt_sq_sum = 0;

    double mean_delay = 0.0;
    double delay_stderr = 0.0;
    double mean_attempts = 0.0;
    double attempt_stderr = 0.0;
    double throughput = 0.0;
    double throughput_stderr = 0.0;
    double feasibility_rate = 0.0;
    double feasibility_stderr = 0.0;

    /// Set when no round was feasible; the delay and throughput fields are then 0.
    bool no_feasible_rounds = false;
};

/**
 * Runs config.trials independent rounds and aggregates feasible ones.
 *
 * Throughput is R / mean(attempt_total) over feasible rounds (or
 * 1 / (R mean) for ThroughputForm::kDivideRate); its standard error comes
 * from the delta method. Results are identical for every worker count.
 */
TrialSummary run_trials(const SimConfig& config, Scheme scheme, unsigned workers = 1);

} // namespace relayharq
