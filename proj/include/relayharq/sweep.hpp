#pragma once

#include "relayharq/policy.hpp"
#include "relayharq/simulator.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace relayharq {

struct SweepSpec {
    double snr_db_min = 0.0;
    double snr_db_max = 20.0;
    double snr_db_step = 2.0;
    std::vector<int> num_relays_list{5, 10};
    std::vector<Scheme> schemes{Scheme::kProposed, Scheme::kFdfr, Scheme::kOptimal};
    bool analytic = false;
    /// Proposed rows take delay from a MinDelay policy and throughput from a
    /// MaxThroughput policy. Otherwise one policy built for `objective` is used.
    bool dual_objective = false;
    Objective objective = Objective::kMinDelay;

    double avg_gain = 1.0;
    double rate = 1.0;
    int max_attempts = 4;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    double beta_max = 0.01;
    ThroughputForm throughput_form = ThroughputForm::kMultiplyRate;
    bool fdfr_strict_relay_cap = false;

    /// Throws std::invalid_argument.
    void validate() const;
    std::vector<double> snr_grid_db() const;
};

struct SweepRow {
    double snr_db = 0.0;
    int num_relays = 0;
    Scheme scheme = Scheme::kProposed;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    double mean_delay = 0.0;
    double delay_stderr = 0.0;
    double throughput = 0.0;
    double throughput_stderr = 0.0;
    double feasibility_rate = 0.0;
    std::optional<double> analytic_delay;
    std::optional<double> analytic_throughput;

    // Not part of the table; kept for callers that post-process a sweep.
    TrialSummary delay_run;
    TrialSummary throughput_run;
    std::optional<AlphaMatrix> delay_alpha;
    std::optional<AlphaMatrix> throughput_alpha;
};

struct SweepOptions {
    unsigned workers = 1;
    std::ostream* trace = nullptr; ///< JSON-lines sink for per-round records
    std::uint64_t trace_rounds = 0; ///< rounds traced per cell
};

/// Seed of one grid cell. Depends on the scheme itself (not its position in
/// the requested list), so adding a scheme leaves other cells unchanged.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t snr_index, int num_relays, Scheme scheme, int variant);

/// Rows in grid order: SNR outer, relay count, then scheme in requested order.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_json(std::ostream& out, const std::vector<SweepRow>& rows);

/// "min:max:step" in dB.
void parse_snr_range(std::string_view text, SweepSpec& spec);
std::vector<int> parse_int_list(std::string_view text);
std::vector<Scheme> parse_scheme_list(std::string_view text);

/// Entry point of the command-line tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace relayharq
