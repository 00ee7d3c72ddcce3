#include "relayharq/channel.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace relayharq {

FadingParams::FadingParams(double avg_gain, double snr, double rate, int max_attempts)
    : avg_gain_(avg_gain), snr_(snr), rate_(rate), max_attempts_(max_attempts)
{
    // Negated comparisons also reject NaN.
    if (!(avg_gain > 0.0))
        throw std::invalid_argument("avg_gain must be positive");
    if (!(snr > 0.0))
        throw std::invalid_argument("snr must be positive");
    if (!(rate > 0.0))
        throw std::invalid_argument("rate must be positive");
    if (max_attempts < 1)
        throw std::invalid_argument("max_attempts must be at least 1");
}

double AttemptPmf::feasible_mass() const noexcept
{
    return std::accumulate(probs.begin(), probs.end(), 0.0);
}

JointPmf::JointPmf(const AttemptPmf& marginal)
    : max_attempts_(marginal.max_attempts())
{
    entries_.reserve(static_cast<std::size_t>(max_attempts_ * max_attempts_));
    for (double pi : marginal.probs)
        for (double pj : marginal.probs)
            entries_.push_back(pi * pj);
}

JointPmf::JointPmf(int max_attempts, std::vector<double> entries)
    : max_attempts_(max_attempts), entries_(std::move(entries))
{
    if (max_attempts < 1 || entries_.size() != static_cast<std::size_t>(max_attempts * max_attempts))
        throw std::invalid_argument("joint pmf must have max_attempts^2 entries");
    for (double p : entries_)
        if (!(p >= 0.0))
            throw std::invalid_argument("joint pmf entries must be non-negative");
}

double JointPmf::total() const noexcept
{
    return std::accumulate(entries_.begin(), entries_.end(), 0.0);
}

double db_to_linear(double db) noexcept
{
    return std::pow(10.0, db / 10.0);
}

double linear_to_db(double linear) noexcept
{
    return 10.0 * std::log10(linear);
}

ChannelGain sample_gain_sq(const FadingParams& params, SplitMix64& rng) noexcept
{
    // Inverse CDF; 1 - u lies in (0, 1].
    const double u = rng.uniform();
    return ChannelGain{-params.avg_gain() * std::log1p(-u)};
}

double mutual_info_per_symbol(const FadingParams& params, ChannelGain g) noexcept
{
    return std::log2(1.0 + params.snr() * g.gain_sq);
}

Attempts required_attempts(const FadingParams& params, ChannelGain g) noexcept
{
    const double mi = mutual_info_per_symbol(params, g);
    if (!(mi > 0.0))
        return kInfeasible;
    const double needed = std::ceil(params.rate() / mi);
    if (needed > static_cast<double>(params.max_attempts()))
        return kInfeasible;
    return static_cast<int>(needed);
}

double attempt_cdf(const FadingParams& params, int n) noexcept
{
    const double threshold = std::expm1(params.rate() / n * std::log(2.0));
    return std::exp(-threshold / (params.avg_gain() * params.snr()));
}

AttemptPmf attempt_pmf(const FadingParams& params)
{
    const int m = params.max_attempts();
    AttemptPmf pmf;
    pmf.probs.resize(static_cast<std::size_t>(m));
    double previous = 0.0; // P{N <= 0}
    for (int n = 1; n <= m; ++n) {
        const double cdf = attempt_cdf(params, n);
        pmf.probs[static_cast<std::size_t>(n - 1)] = cdf - previous;
        previous = cdf;
    }
    pmf.tail = 1.0 - previous;
    return pmf;
}

JointPmf joint_pmf(const FadingParams& params)
{
    return JointPmf(attempt_pmf(params));
}

} // namespace relayharq
