#include "relayharq/policy.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace relayharq {

AlphaMatrix::AlphaMatrix(int max_attempts, std::vector<int> entries)
    : max_attempts_(max_attempts), entries_(std::move(entries))
{
    if (max_attempts < 1)
        throw std::invalid_argument("alpha: max_attempts must be at least 1");
    if (entries_.size() != static_cast<std::size_t>(max_attempts * max_attempts))
        throw std::invalid_argument("alpha: expected " + std::to_string(max_attempts * max_attempts) +
                                    " entries, got " + std::to_string(entries_.size()));
    for (int i = 1; i <= max_attempts; ++i) {
        for (int j = 1; j <= max_attempts; ++j) {
            const int a = at(i, j);
            if (a < i || a > max_attempts)
                throw std::invalid_argument("alpha(" + std::to_string(i) + "," + std::to_string(j) + ") = " +
                                            std::to_string(a) + " outside [" + std::to_string(i) + ", " +
                                            std::to_string(max_attempts) + "]");
        }
    }
}

AlphaMatrix AlphaMatrix::first_decode(int max_attempts)
{
    if (max_attempts < 1)
        throw std::invalid_argument("alpha: max_attempts must be at least 1");
    std::vector<int> entries;
    entries.reserve(static_cast<std::size_t>(max_attempts * max_attempts));
    for (int i = 1; i <= max_attempts; ++i)
        entries.insert(entries.end(), static_cast<std::size_t>(max_attempts), i);
    return AlphaMatrix(max_attempts, std::move(entries));
}

AlphaMatrix AlphaMatrix::with_entry(int i, int j, int value) const
{
    std::vector<int> entries = entries_;
    entries.at(static_cast<std::size_t>((i - 1) * max_attempts_ + (j - 1))) = value;
    return AlphaMatrix(max_attempts_, std::move(entries));
}

nlohmann::json to_json(const AlphaMatrix& alpha)
{
    const int m = alpha.max_attempts();
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 1; i <= m; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 1; j <= m; ++j)
            row.push_back(alpha.at(i, j));
        rows.push_back(std::move(row));
    }
    return {{"max_attempts", m}, {"entries", std::move(rows)}};
}

AlphaMatrix alpha_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object() || !doc.contains("max_attempts") || !doc.contains("entries"))
        throw std::invalid_argument("alpha: expected an object with \"max_attempts\" and \"entries\"");
    const auto& m_field = doc.at("max_attempts");
    if (!m_field.is_number_integer())
        throw std::invalid_argument("alpha: \"max_attempts\" must be an integer");
    const int m = m_field.get<int>();
    const auto& rows = doc.at("entries");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(std::max(m, 0)))
        throw std::invalid_argument("alpha: \"entries\" must hold max_attempts rows");
    std::vector<int> entries;
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != static_cast<std::size_t>(m))
            throw std::invalid_argument("alpha: every row must hold max_attempts entries");
        for (const auto& v : row) {
            if (!v.is_number_integer())
                throw std::invalid_argument("alpha: entries must be integers");
            entries.push_back(v.get<int>());
        }
    }
    return AlphaMatrix(m, std::move(entries));
}

ClassPartition make_partition(const AlphaMatrix& alpha, const JointPmf& joint)
{
    const int m = alpha.max_attempts();
    if (joint.max_attempts() != m)
        throw std::invalid_argument("alpha and joint pmf disagree on max_attempts");
    ClassPartition partition;
    partition.classes.resize(static_cast<std::size_t>(m));
    partition.class_mass.assign(static_cast<std::size_t>(m), 0.0);
    for (int i = 1; i <= m; ++i) {
        for (int j = 1; j <= m; ++j) {
            const auto n = static_cast<std::size_t>(alpha.at(i, j) - 1);
            partition.classes[n].push_back({i, j});
            partition.class_mass[n] += joint(i, j);
        }
    }
    return partition;
}

ClassSelection class_select_probs(std::span<const double> class_mass, int num_relays)
{
    if (num_relays < 1)
        throw std::invalid_argument("num_relays must be at least 1");
    ClassSelection out;
    out.select_prob.reserve(class_mass.size());
    double cumulative = 0.0;
    double none_before = 1.0; // (1 - Q_{n-1})^N
    for (double q : class_mass) {
        cumulative += q;
        const double none_through = std::pow(std::max(0.0, 1.0 - cumulative), num_relays);
        out.select_prob.push_back(none_before - none_through);
        none_before = none_through;
    }
    out.non_outage_prob = 1.0 - none_before;
    return out;
}

ClassSelection class_select_probs(const ClassPartition& partition, int num_relays)
{
    return class_select_probs(partition.class_mass, num_relays);
}

namespace {

// Conditional moments of the winner's delay (n + j) and attempts (i + j)
// given its class, weighted by the class-selection probabilities.
struct Moments {
    double delay1 = 0.0;
    double delay2 = 0.0;
    double attempts1 = 0.0;
    double attempts2 = 0.0;
    double non_outage = 0.0;
};

Moments moments(const ClassPartition& partition, const ClassSelection& selection, const JointPmf& joint)
{
    Moments out;
    out.non_outage = selection.non_outage_prob;
    for (std::size_t c = 0; c < partition.classes.size(); ++c) {
        const double q = partition.class_mass[c];
        // Empty or zero-mass classes are never selected.
        if (!(q > 0.0))
            continue;
        const int n = static_cast<int>(c) + 1;
        double d1 = 0.0, d2 = 0.0, a1 = 0.0, a2 = 0.0;
        for (const auto [i, j] : partition.classes[c]) {
            const double p = joint(i, j);
            const double d = n + j;
            const double a = i + j;
            d1 += d * p;
            d2 += d * d * p;
            a1 += a * p;
            a2 += a * a * p;
        }
        const double w = selection.select_prob[c] / q;
        out.delay1 += d1 * w;
        out.delay2 += d2 * w;
        out.attempts1 += a1 * w;
        out.attempts2 += a2 * w;
    }
    return out;
}

Moments checked_moments(const ClassPartition& partition, int num_relays, const JointPmf& joint)
{
    if (joint.max_attempts() != partition.max_attempts())
        throw std::invalid_argument("partition and joint pmf disagree on max_attempts");
    const ClassSelection selection = class_select_probs(partition, num_relays);
    if (!(selection.non_outage_prob > 0.0))
        throw NoFeasibleConfiguration();
    return moments(partition, selection, joint);
}

double rate_ratio(double non_outage, double attempts_sum, double rate, ThroughputForm form)
{
    return form == ThroughputForm::kMultiplyRate ? non_outage * rate / attempts_sum
                                                 : non_outage / (attempts_sum * rate);
}

} // namespace

double expected_delay(const ClassPartition& partition, int num_relays, const JointPmf& joint)
{
    const Moments m = checked_moments(partition, num_relays, joint);
    return m.delay1 / m.non_outage;
}

double throughput(const ClassPartition& partition, int num_relays, const JointPmf& joint, double rate,
                  ThroughputForm form)
{
    const Moments m = checked_moments(partition, num_relays, joint);
    return rate_ratio(m.non_outage, m.attempts1, rate, form);
}

PolicyEvaluation evaluate_policy(const AlphaMatrix& alpha, const JointPmf& joint, int num_relays, double rate)
{
    const ClassPartition partition = make_partition(alpha, joint);
    const ClassSelection selection = class_select_probs(partition, num_relays);
    if (!(selection.non_outage_prob > 0.0))
        throw NoFeasibleConfiguration();
    const Moments m = moments(partition, selection, joint);

    PolicyEvaluation eval;
    eval.non_outage_prob = selection.non_outage_prob;
    eval.expected_delay = m.delay1 / m.non_outage;
    eval.delay_variance = std::max(0.0, m.delay2 / m.non_outage - eval.expected_delay * eval.expected_delay);
    eval.expected_attempts = m.attempts1 / m.non_outage;
    eval.attempt_variance =
        std::max(0.0, m.attempts2 / m.non_outage - eval.expected_attempts * eval.expected_attempts);
    eval.throughput = rate_ratio(m.non_outage, m.attempts1, rate, ThroughputForm::kMultiplyRate);
    eval.throughput_literal = rate_ratio(m.non_outage, m.attempts1, rate, ThroughputForm::kDivideRate);
    eval.class_mass = partition.class_mass;
    eval.per_class_select_prob = selection.select_prob;
    return eval;
}

Objective parse_objective(std::string_view name)
{
    if (name == "delay")
        return Objective::kMinDelay;
    if (name == "throughput")
        return Objective::kMaxThroughput;
    throw std::invalid_argument("unknown objective '" + std::string(name) + "' (expected delay|throughput)");
}

std::string_view to_string(Objective objective) noexcept
{
    return objective == Objective::kMinDelay ? "delay" : "throughput";
}

double objective_value(const PolicyEvaluation& eval, Objective objective) noexcept
{
    return objective == Objective::kMinDelay ? eval.expected_delay : eval.throughput;
}

OptimizationResult optimize_alpha(const JointPmf& joint, int num_relays, double rate, Objective objective)
{
    const int m = joint.max_attempts();

    // Lower is better for both objectives.
    auto cost = [&](const AlphaMatrix& alpha) {
        const PolicyEvaluation eval = evaluate_policy(alpha, joint, num_relays, rate);
        return objective == Objective::kMinDelay ? eval.expected_delay : -eval.throughput;
    };

    auto natural = [&](double c) { return objective == Objective::kMinDelay ? c : -c; };

    AlphaMatrix alpha = AlphaMatrix::first_decode(m);
    double current = cost(alpha);
    std::vector<double> trace{natural(current)};
    int sweeps = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        ++sweeps;
        for (int i = 1; i <= m; ++i) {
            for (int j = 1; j <= m; ++j) {
                // Classes below i are infeasible (infinite cost).
                int best_k = alpha.at(i, j);
                double best = current;
                for (int k = i; k <= m; ++k) {
                    const double value = k == alpha.at(i, j) ? current : cost(alpha.with_entry(i, j, k));
                    if (value < best || (value == best && k < best_k)) {
                        best = value;
                        best_k = k;
                    }
                }
                if (best_k != alpha.at(i, j)) {
                    alpha = alpha.with_entry(i, j, best_k);
                    current = best;
                    changed = true;
                }
                trace.push_back(natural(current));
            }
        }
    }
    return OptimizationResult{std::move(alpha), natural(current), sweeps, std::move(trace)};
}

OptimizationResult optimize_alpha(const FadingParams& params, int num_relays, Objective objective)
{
    return optimize_alpha(joint_pmf(params), num_relays, params.rate(), objective);
}

} // namespace relayharq
