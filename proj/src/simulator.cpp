#include "relayharq/simulator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace relayharq {

Scheme parse_scheme(std::string_view name)
{
    if (name == "proposed")
        return Scheme::kProposed;
    if (name == "fdfr")
        return Scheme::kFdfr;
    if (name == "optimal")
        return Scheme::kOptimal;
    throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected proposed|fdfr|optimal)");
}

std::string_view to_string(Scheme scheme) noexcept
{
    switch (scheme) {
    case Scheme::kProposed:
        return "proposed";
    case Scheme::kFdfr:
        return "fdfr";
    case Scheme::kOptimal:
        return "optimal";
    }
    return "unknown";
}

nlohmann::json to_json(const RoundOutcome& outcome)
{
    nlohmann::json doc = {{"scheme", to_string(outcome.scheme)}, {"feasible", outcome.feasible}};
    if (!outcome.feasible) {
        for (const char* key : {"winner_id", "takeover_slot", "winner_src_attempts", "winner_dst_attempts",
                                "delay_slots", "attempt_total"})
            doc[key] = nullptr;
        return doc;
    }
    doc["winner_id"] = *outcome.winner_id;
    doc["takeover_slot"] = outcome.takeover_slot;
    doc["winner_src_attempts"] = outcome.winner_src_attempts;
    doc["winner_dst_attempts"] = outcome.winner_dst_attempts;
    doc["delay_slots"] = outcome.delay_slots;
    doc["attempt_total"] = outcome.attempt_total;
    return doc;
}

namespace {

RoundOutcome make_outcome(Scheme scheme, const RelayNode* winner, int takeover)
{
    RoundOutcome out;
    out.scheme = scheme;
    if (winner == nullptr)
        return out;
    out.feasible = true;
    out.winner_id = winner->id;
    out.takeover_slot = takeover;
    out.winner_src_attempts = *winner->src_attempts;
    out.winner_dst_attempts = *winner->dst_attempts;
    out.delay_slots = takeover + *winner->dst_attempts;
    out.attempt_total = *winner->src_attempts + *winner->dst_attempts;
    return out;
}

// Earliest firing time wins; exact ties (probability zero) go to the lower id.
template <typename FireTime>
const RelayNode* earliest(std::span<const RelayNode> relays, FireTime fire_time)
{
    const RelayNode* best = nullptr;
    double best_time = 0.0;
    for (const RelayNode& r : relays) {
        const std::optional<double> t = fire_time(r);
        if (!t)
            continue;
        if (best == nullptr || *t < best_time || (*t == best_time && r.id < best->id)) {
            best = &r;
            best_time = *t;
        }
    }
    return best;
}

} // namespace

RoundOutcome run_round_proposed(std::span<const RelayNode> relays, const AlphaMatrix& alpha)
{
    const RelayNode* winner = earliest(relays, [&](const RelayNode& r) -> std::optional<double> {
        if (!r.eligible())
            return std::nullopt;
        return alpha.at(*r.src_attempts, *r.dst_attempts) + r.beta;
    });
    return make_outcome(Scheme::kProposed, winner,
                        winner ? alpha.at(*winner->src_attempts, *winner->dst_attempts) : 0);
}

RoundOutcome run_round_fdfr(std::span<const RelayNode> relays, std::optional<int> exclusive_relay_cap)
{
    const RelayNode* winner = earliest(relays, [&](const RelayNode& r) -> std::optional<double> {
        if (!r.eligible() || (exclusive_relay_cap && *r.dst_attempts >= *exclusive_relay_cap))
            return std::nullopt;
        return *r.src_attempts + r.beta;
    });
    return make_outcome(Scheme::kFdfr, winner, winner ? *winner->src_attempts : 0);
}

RoundOutcome run_round_optimal(std::span<const RelayNode> relays)
{
    const RelayNode* winner = nullptr;
    for (const RelayNode& r : relays) {
        if (!r.eligible())
            continue;
        if (winner == nullptr) {
            winner = &r;
            continue;
        }
        const int total = *r.src_attempts + *r.dst_attempts;
        const int best_total = *winner->src_attempts + *winner->dst_attempts;
        if (total < best_total || (total == best_total && r.beta < winner->beta))
            winner = &r;
    }
    return make_outcome(Scheme::kOptimal, winner, winner ? *winner->src_attempts : 0);
}

std::vector<RelayNode> draw_relays(const FadingParams& params, int num_relays, double beta_max, SplitMix64& rng)
{
    std::vector<RelayNode> relays;
    relays.reserve(static_cast<std::size_t>(num_relays));
    for (int k = 0; k < num_relays; ++k) {
        RelayNode node;
        node.id = k;
        node.src_attempts = required_attempts(params, sample_gain_sq(params, rng));
        node.dst_attempts = required_attempts(params, sample_gain_sq(params, rng));
        node.beta = beta_max * rng.uniform();
        relays.push_back(node);
    }
    return relays;
}

void SimConfig::validate(Scheme scheme) const
{
    if (num_relays < 1)
        throw std::invalid_argument("num_relays must be at least 1");
    if (trials < 1)
        throw std::invalid_argument("trials must be at least 1");
    if (!(beta_max > 0.0 && beta_max < 1.0))
        throw std::invalid_argument("beta_max must lie in (0, 1)");
    if (scheme == Scheme::kProposed) {
        if (!alpha)
            throw std::invalid_argument("the proposed scheme needs an alpha matrix");
        if (alpha->max_attempts() != params.max_attempts())
            throw std::invalid_argument("alpha matrix size does not match max_attempts");
    }
}

RoundOutcome simulate_round(const SimConfig& config, Scheme scheme, std::uint64_t trial)
{
    SplitMix64 rng = SplitMix64::substream(config.seed, trial);
    const std::vector<RelayNode> relays = draw_relays(config.params, config.num_relays, config.beta_max, rng);
    switch (scheme) {
    case Scheme::kProposed:
        return run_round_proposed(relays, *config.alpha);
    case Scheme::kFdfr:
        return run_round_fdfr(relays, config.fdfr_strict_relay_cap
                                          ? std::optional<int>(config.params.max_attempts())
                                          : std::nullopt);
    case Scheme::kOptimal:
        return run_round_optimal(relays);
    }
    throw std::logic_error("unhandled scheme");
}

namespace {

struct Accumulator {
    std::uint64_t feasible = 0;
    std::uint64_t delay = 0;
    std::uint64_t delay_sq = 0;
    std::uint64_t attempts = 0;
    std::uint64_t attempts_sq = 0;

    void add(const RoundOutcome& r)
    {
        if (!r.feasible)
            return;
        const auto d = static_cast<std::uint64_t>(r.delay_slots);
        const auto a = static_cast<std::uint64_t>(r.attempt_total);
        ++feasible;
        delay += d;
        delay_sq += d * d;
        attempts += a;
        attempts_sq += a * a;
    }

    void merge(const Accumulator& o)
    {
        feasible += o.feasible;
        delay += o.delay;
        delay_sq += o.delay_sq;
        attempts += o.attempts;
        attempts_sq += o.attempts_sq;
    }
};

// Mean and standard error of the mean from exact sums.
std::pair<double, double> mean_stderr(std::uint64_t n, std::uint64_t sum, std::uint64_t sq_sum)
{
    const double nd = static_cast<double>(n);
    const double mean = static_cast<double>(sum) / nd;
    if (n < 2)
        return {mean, 0.0};
    // n * sq_sum - sum^2 computed in long double to limit cancellation.
    const long double num = static_cast<long double>(n) * static_cast<long double>(sq_sum) -
                            static_cast<long double>(sum) * static_cast<long double>(sum);
    const double var = std::max(0.0, static_cast<double>(num / (static_cast<long double>(n) * (n - 1))));
    return {mean, std::sqrt(var / nd)};
}

} // namespace

TrialSummary run_trials(const SimConfig& config, Scheme scheme, unsigned workers)
{
    config.validate(scheme);
    workers = std::max(1u, workers);
    if (workers > config.trials)
        workers = static_cast<unsigned>(config.trials);

    std::vector<Accumulator> parts(workers);
    auto run_range = [&](unsigned w) {
        const std::uint64_t begin = config.trials * w / workers;
        const std::uint64_t end = config.trials * (w + 1) / workers;
        Accumulator& acc = parts[w];
        for (std::uint64_t t = begin; t < end; ++t)
            acc.add(simulate_round(config, scheme, t));
    };
    if (workers == 1) {
        run_range(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(run_range, w);
    }

    Accumulator total;
    for (const Accumulator& p : parts)
        total.merge(p);

    TrialSummary s;
    s.trials = config.trials;
    s.feasible_rounds = total.feasible;
    s.delay_sum = total.delay;
    s.delay_sq_sum = total.delay_sq;
    s.attempt_sum = total.attempts;
    s.attempt_sq_sum = total.attempts_sq;

    const double n = static_cast<double>(config.trials);
    s.feasibility_rate = static_cast<double>(total.feasible) / n;
    s.feasibility_stderr = std::sqrt(s.feasibility_rate * (1.0 - s.feasibility_rate) / n);
    if (total.feasible == 0) {
        s.no_feasible_rounds = true;
        return s;
    }

    std::tie(s.mean_delay, s.delay_stderr) = mean_stderr(total.feasible, total.delay, total.delay_sq);
    std::tie(s.mean_attempts, s.attempt_stderr) = mean_stderr(total.feasible, total.attempts, total.attempts_sq);
    const double rate = config.params.rate();
    if (config.throughput_form == ThroughputForm::kMultiplyRate) {
        s.throughput = rate / s.mean_attempts;
        s.throughput_stderr = rate * s.attempt_stderr / (s.mean_attempts * s.mean_attempts);
    } else {
        s.throughput = 1.0 / (rate * s.mean_attempts);
        s.throughput_stderr = s.attempt_stderr / (rate * s.mean_attempts * s.mean_attempts);
    }
    return s;
}

} // namespace relayharq
