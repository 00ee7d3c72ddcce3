#pragma once

#include "relayharq/channel.hpp"

#include "json.hpp"

#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace relayharq {

/// Raised when no relay can carry the packet on both hops, so every
/// conditional objective is 0/0.
class NoFeasibleConfiguration : public std::runtime_error {
public:
    NoFeasibleConfiguration() : std::runtime_error("no feasible relay configuration") {}
};

/**
 * Timer-class assignment. A relay that needs i source-link attempts and j
 * relay-link attempts fires after at(i, j) transmission intervals.
 *
 * Invariant: i <= at(i, j) <= M for every 1-based pair, because a relay
 * cannot forward before it has decoded.
 */
class AlphaMatrix {
public:
    /// Row-major entries, rows indexed by i. Throws std::invalid_argument on a
    /// size mismatch or a violated invariant.
    AlphaMatrix(int max_attempts, std::vector<int> entries);

    /// at(i, j) = i: every relay forwards as soon as it decodes.
    static AlphaMatrix first_decode(int max_attempts);

    int max_attempts() const noexcept { return max_attempts_; }
    int at(int i, int j) const
    {
        return entries_[static_cast<std::size_t>((i - 1) * max_attempts_ + (j - 1))];
    }
    const std::vector<int>& entries() const noexcept { return entries_; }

    /// Copy with a single entry replaced.
    AlphaMatrix with_entry(int i, int j, int value) const;

    friend bool operator==(const AlphaMatrix&, const AlphaMatrix&) = default;

private:
    int max_attempts_;
    std::vector<int> entries_;
};

/// {"max_attempts": M, "entries": [[...], ...]}, rows = i.
nlohmann::json to_json(const AlphaMatrix& alpha);
/// Throws std::invalid_argument on malformed or ill-sized input.
AlphaMatrix alpha_from_json(const nlohmann::json& doc);

struct AttemptPair {
    int i;
    int j;
    friend bool operator==(const AttemptPair&, const AttemptPair&) = default;
};

/// The sets of (i, j) pairs sharing a timer class, and their probability mass.
struct ClassPartition {
    std::vector<std::vector<AttemptPair>> classes; ///< classes[n - 1]
    std::vector<double> class_mass;                ///< class_mass[n - 1] = sum of P(i, j) over the class

    int max_attempts() const noexcept { return static_cast<int>(classes.size()); }
};

ClassPartition make_partition(const AlphaMatrix& alpha, const JointPmf& joint);

/// Probability that the winning relay belongs to each class.
struct ClassSelection {
    std::vector<double> select_prob; ///< P{some relay in class n, none in classes < n}
    double non_outage_prob = 0.0;    ///< P{some relay is feasible}
};

/// Relays hold i.i.d. pairs, so with cumulative mass Q_n
///   select_prob[n] = (1 - Q_{n-1})^N - (1 - Q_n)^N,  non_outage = 1 - (1 - Q_M)^N.
/// Throws std::invalid_argument for num_relays < 1.
ClassSelection class_select_probs(std::span<const double> class_mass, int num_relays);
ClassSelection class_select_probs(const ClassPartition& partition, int num_relays);

/// How the spectral efficiency enters the throughput ratio.
enum class ThroughputForm {
    kMultiplyRate, ///< eta = R P{feasible} / sum  (bits per symbol; default)
    kDivideRate,   ///< eta = P{feasible} / (sum R), the printed form
};

/// Expected delay in slots (source slots up to takeover plus relay slots),
/// conditional on a feasible relay. Throws NoFeasibleConfiguration.
double expected_delay(const ClassPartition& partition, int num_relays, const JointPmf& joint);

/// Throughput with the winner attempt count i + j. Throws NoFeasibleConfiguration.
double throughput(const ClassPartition& partition, int num_relays, const JointPmf& joint, double rate,
                  ThroughputForm form = ThroughputForm::kMultiplyRate);

struct PolicyEvaluation {
    double expected_delay = 0.0;
    double delay_variance = 0.0;
    double expected_attempts = 0.0; ///< mean winner i + j, conditional on feasibility
    double attempt_variance = 0.0;
    double throughput = 0.0;         ///< ThroughputForm::kMultiplyRate
    double throughput_literal = 0.0; ///< ThroughputForm::kDivideRate
    double non_outage_prob = 0.0;
    std::vector<double> class_mass;
    std::vector<double> per_class_select_prob;
};

PolicyEvaluation evaluate_policy(const AlphaMatrix& alpha, const JointPmf& joint, int num_relays, double rate);

enum class Objective { kMinDelay, kMaxThroughput };

Objective parse_objective(std::string_view name);
std::string_view to_string(Objective objective) noexcept;

struct OptimizationResult {
    AlphaMatrix alpha;
    double objective_value;
    int sweeps;                ///< full passes over the matrix, including the final unchanged one
    std::vector<double> trace; ///< objective after initialization and after every entry visit
};

/**
 * Coordinate search over timer classes.
 *
 * Starts from at(i, j) = i and visits the entries row-major. Each visit tries
 * every class k in [i, M] for the entry with all others fixed and keeps the
 * best (smallest k on ties). Stops after a pass that changes nothing. The
 * result is a fixed point of single-entry moves, not necessarily the global
 * optimum.
 *
 * Throws NoFeasibleConfiguration when no pair is feasible.
 */
OptimizationResult optimize_alpha(const FadingParams& params, int num_relays, Objective objective);
OptimizationResult optimize_alpha(const JointPmf& joint, int num_relays, double rate, Objective objective);

/// Value of the objective in its natural orientation (delay or throughput).
double objective_value(const PolicyEvaluation& eval, Objective objective) noexcept;

} // namespace relayharq
