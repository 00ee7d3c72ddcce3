#include "relayharq/sweep.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace relayharq {

void SweepSpec::validate() const
{
    if (!(snr_db_step > 0.0))
        throw std::invalid_argument("SNR step must be positive");
    if (!(snr_db_min <= snr_db_max))
        throw std::invalid_argument("SNR minimum must not exceed the maximum");
    if (num_relays_list.empty())
        throw std::invalid_argument("at least one relay count is required");
    for (int n : num_relays_list)
        if (n < 1)
            throw std::invalid_argument("relay counts must be at least 1");
    if (schemes.empty())
        throw std::invalid_argument("at least one scheme is required");
    if (trials < 1)
        throw std::invalid_argument("trials must be at least 1");
    if (!(beta_max > 0.0 && beta_max < 1.0))
        throw std::invalid_argument("beta_max must lie in (0, 1)");
    // Rejects bad gain, rate or attempt cap with the same messages as the model.
    FadingParams(avg_gain, 1.0, rate, max_attempts);
}

std::vector<double> SweepSpec::snr_grid_db() const
{
    const auto steps = static_cast<std::size_t>(std::floor((snr_db_max - snr_db_min) / snr_db_step + 1e-9));
    std::vector<double> grid;
    grid.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k)
        grid.push_back(snr_db_min + static_cast<double>(k) * snr_db_step);
    return grid;
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t snr_index, int num_relays, Scheme scheme, int variant)
{
    std::uint64_t s = combine_seed(seed, snr_index);
    s = combine_seed(s, static_cast<std::uint64_t>(num_relays));
    s = combine_seed(s, static_cast<std::uint64_t>(scheme));
    return combine_seed(s, static_cast<std::uint64_t>(variant));
}

namespace {

struct Policies {
    std::optional<AlphaMatrix> delay_alpha;
    std::optional<AlphaMatrix> throughput_alpha;
};

Policies build_policies(const SweepSpec& spec, const JointPmf& joint, int num_relays)
{
    Policies p;
    try {
        if (spec.dual_objective) {
            p.delay_alpha = optimize_alpha(joint, num_relays, spec.rate, Objective::kMinDelay).alpha;
            p.throughput_alpha = optimize_alpha(joint, num_relays, spec.rate, Objective::kMaxThroughput).alpha;
        } else {
            p.delay_alpha = optimize_alpha(joint, num_relays, spec.rate, spec.objective).alpha;
            p.throughput_alpha = p.delay_alpha;
        }
    } catch (const NoFeasibleConfiguration&) {
        // Leaves both empty; the proposed cell reports no result.
    }
    return p;
}

void trace_cell(const SweepOptions& options, const SimConfig& config, Scheme scheme, double snr_db, int variant)
{
    if (options.trace == nullptr || options.trace_rounds == 0)
        return;
    const std::uint64_t rounds = std::min(options.trace_rounds, config.trials);
    for (std::uint64_t t = 0; t < rounds; ++t) {
        nlohmann::json rec = to_json(simulate_round(config, scheme, t));
        rec["snr_db"] = snr_db;
        rec["num_relays"] = config.num_relays;
        rec["variant"] = variant;
        rec["trial"] = t;
        *options.trace << rec.dump() << '\n';
    }
}

} // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& options)
{
    spec.validate();
    const std::vector<double> grid = spec.snr_grid_db();
    std::vector<SweepRow> rows;
    rows.reserve(grid.size() * spec.num_relays_list.size() * spec.schemes.size());

    for (std::size_t si = 0; si < grid.size(); ++si) {
        const double snr_db = grid[si];
        const FadingParams params(spec.avg_gain, db_to_linear(snr_db), spec.rate, spec.max_attempts);
        const JointPmf joint = joint_pmf(params);

        for (int num_relays : spec.num_relays_list) {
            const bool wants_proposed =
                std::find(spec.schemes.begin(), spec.schemes.end(), Scheme::kProposed) != spec.schemes.end();
            const Policies policies = wants_proposed ? build_policies(spec, joint, num_relays) : Policies{};

            for (Scheme scheme : spec.schemes) {
                SweepRow row;
                row.snr_db = snr_db;
                row.num_relays = num_relays;
                row.scheme = scheme;
                row.trials = spec.trials;
                row.seed = spec.seed;

                auto config_for = [&](int variant, std::optional<AlphaMatrix> alpha) {
                    return SimConfig{params,
                                     num_relays,
                                     std::move(alpha),
                                     spec.trials,
                                     cell_seed(spec.seed, si, num_relays, scheme, variant),
                                     spec.beta_max,
                                     spec.throughput_form,
                                     spec.fdfr_strict_relay_cap};
                };

                if (scheme == Scheme::kProposed) {
                    if (!policies.delay_alpha) {
                        row.delay_run.no_feasible_rounds = true;
                        row.throughput_run.no_feasible_rounds = true;
                        rows.push_back(std::move(row));
                        continue;
                    }
                    row.delay_alpha = policies.delay_alpha;
                    row.throughput_alpha = policies.throughput_alpha;
                    const SimConfig delay_cfg = config_for(0, policies.delay_alpha);
                    row.delay_run = run_trials(delay_cfg, scheme, options.workers);
                    trace_cell(options, delay_cfg, scheme, snr_db, 0);
                    if (spec.dual_objective) {
                        const SimConfig thr_cfg = config_for(1, policies.throughput_alpha);
                        row.throughput_run = run_trials(thr_cfg, scheme, options.workers);
                        trace_cell(options, thr_cfg, scheme, snr_db, 1);
                    } else {
                        row.throughput_run = row.delay_run;
                    }
                    if (spec.analytic) {
                        row.analytic_delay =
                            evaluate_policy(*row.delay_alpha, joint, num_relays, spec.rate).expected_delay;
                        const PolicyEvaluation thr =
                            evaluate_policy(*row.throughput_alpha, joint, num_relays, spec.rate);
                        row.analytic_throughput = spec.throughput_form == ThroughputForm::kMultiplyRate
                                                      ? thr.throughput
                                                      : thr.throughput_literal;
                    }
                } else {
                    const SimConfig cfg = config_for(0, std::nullopt);
                    row.delay_run = run_trials(cfg, scheme, options.workers);
                    row.throughput_run = row.delay_run;
                    trace_cell(options, cfg, scheme, snr_db, 0);
                }

                row.mean_delay = row.delay_run.mean_delay;
                row.delay_stderr = row.delay_run.delay_stderr;
                row.throughput = row.throughput_run.throughput;
                row.throughput_stderr = row.throughput_run.throughput_stderr;
                row.feasibility_rate = row.delay_run.feasibility_rate;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

namespace {

constexpr const char* kCsvHeader = "snr_db,num_relays,scheme,trials,seed,mean_delay,delay_stderr,throughput,"
                                   "throughput_stderr,feasibility_rate,analytic_delay,analytic_throughput";

std::string num(double v)
{
    return fmt::format("{:.12g}", v);
}

std::string opt_num(const std::optional<double>& v)
{
    return v ? num(*v) : std::string();
}

bool has_result(const SweepRow& row)
{
    return !row.delay_run.no_feasible_rounds && !row.throughput_run.no_feasible_rounds;
}

} // namespace

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << kCsvHeader << '\n';
    for (const SweepRow& r : rows) {
        const bool ok = has_result(r);
        out << num(r.snr_db) << ',' << r.num_relays << ',' << to_string(r.scheme) << ',' << r.trials << ','
            << r.seed << ',' << (ok ? num(r.mean_delay) : "") << ',' << (ok ? num(r.delay_stderr) : "") << ','
            << (ok ? num(r.throughput) : "") << ',' << (ok ? num(r.throughput_stderr) : "") << ','
            << num(r.feasibility_rate) << ',' << opt_num(r.analytic_delay) << ',' << opt_num(r.analytic_throughput)
            << '\n';
    }
}

void write_json(std::ostream& out, const std::vector<SweepRow>& rows)
{
    nlohmann::json doc = nlohmann::json::array();
    auto value = [](bool ok, double v) { return ok ? nlohmann::json(v) : nlohmann::json(nullptr); };
    auto optional = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    for (const SweepRow& r : rows) {
        const bool ok = has_result(r);
        doc.push_back({{"snr_db", r.snr_db},
                       {"num_relays", r.num_relays},
                       {"scheme", to_string(r.scheme)},
                       {"trials", r.trials},
                       {"seed", r.seed},
                       {"mean_delay", value(ok, r.mean_delay)},
                       {"delay_stderr", value(ok, r.delay_stderr)},
                       {"throughput", value(ok, r.throughput)},
                       {"throughput_stderr", value(ok, r.throughput_stderr)},
                       {"feasibility_rate", r.feasibility_rate},
                       {"analytic_delay", optional(r.analytic_delay)},
                       {"analytic_throughput", optional(r.analytic_throughput)}});
    }
    out << doc.dump(2) << '\n';
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

double parse_double(std::string_view text)
{
    const std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (s.empty() || used != s.size())
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

} // namespace

void parse_snr_range(std::string_view text, SweepSpec& spec)
{
    const auto parts = split(text, ':');
    if (parts.size() != 3)
        throw std::invalid_argument("SNR range must be min:max:step, got '" + std::string(text) + "'");
    spec.snr_db_min = parse_double(parts[0]);
    spec.snr_db_max = parse_double(parts[1]);
    spec.snr_db_step = parse_double(parts[2]);
}

std::vector<int> parse_int_list(std::string_view text)
{
    std::vector<int> out;
    for (std::string_view part : split(text, ',')) {
        int v = 0;
        const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || res.ec != std::errc() || res.ptr != part.data() + part.size())
            throw std::invalid_argument("not an integer: '" + std::string(part) + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<Scheme> parse_scheme_list(std::string_view text)
{
    std::vector<Scheme> out;
    for (std::string_view part : split(text, ','))
        out.push_back(parse_scheme(part));
    return out;
}

} // namespace relayharq
