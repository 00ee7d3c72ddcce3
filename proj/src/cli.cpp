#include "relayharq/sweep.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <sstream>
#include <thread>

namespace relayharq {

namespace {

struct Scenario {
    double avg_gain = 1.0;
    double snr_db = 10.0;
    std::optional<double> snr_linear;
    double rate = 1.0;
    int max_attempts = 4;
    int num_relays = 5;

    FadingParams params() const
    {
        return FadingParams(avg_gain, snr_linear ? *snr_linear : db_to_linear(snr_db), rate, max_attempts);
    }
};

void add_scenario_flags(CLI::App& cmd, Scenario& s)
{
    cmd.add_option("--avg-gain", s.avg_gain, "Mean channel power gain")->capture_default_str();
    auto* db = cmd.add_option("--snr-db", s.snr_db, "SNR in dB")->capture_default_str();
    auto* lin = cmd.add_option("--snr", s.snr_linear, "Linear SNR (overrides --snr-db)");
    db->excludes(lin);
    cmd.add_option("--rate", s.rate, "Spectral efficiency R in bits/symbol")->capture_default_str();
    cmd.add_option("--max-attempts", s.max_attempts, "Attempt cap M per link")->capture_default_str();
    cmd.add_option("--relays", s.num_relays, "Number of relays N")->capture_default_str();
}

// Writes to the file when a path is given, otherwise to `out`.
void emit(const std::string& text, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    file << text;
}

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot read '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
    }
}

nlohmann::json evaluation_json(const FadingParams& params, const AlphaMatrix& alpha, int num_relays)
{
    const AttemptPmf pmf = attempt_pmf(params);
    const JointPmf joint(pmf);
    const PolicyEvaluation eval = evaluate_policy(alpha, joint, num_relays, params.rate());
    return {{"pmf", {{"probs", pmf.probs}, {"tail", pmf.tail}}},
            {"joint_feasible_mass", joint.total()},
            {"class_mass", eval.class_mass},
            {"per_class_select_prob", eval.per_class_select_prob},
            {"non_outage_prob", eval.non_outage_prob},
            {"expected_delay", eval.expected_delay},
            {"expected_attempts", eval.expected_attempts},
            {"throughput", eval.throughput},
            {"throughput_eq12_literal", eval.throughput_literal}};
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Timer-based relay selection for relay-assisted IR-HARQ"};
    app.require_subcommand(1);

    // sweep
    SweepSpec spec;
    std::string snr_range = "0:20:2";
    std::string relays = "5,10";
    std::string schemes = "proposed,fdfr,optimal";
    std::string objective = "delay";
    std::string format = "csv";
    std::string sweep_output;
    std::string trace_path;
    std::uint64_t trace_rounds = 0;
    bool eq12_literal = false;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over SNR and relay count");
    sweep->add_option("--snr-db", snr_range, "SNR grid min:max:step in dB")->capture_default_str();
    sweep->add_option("--relays", relays, "Comma-separated relay counts")->capture_default_str();
    sweep->add_option("--schemes", schemes, "Comma-separated subset of proposed,fdfr,optimal")
        ->capture_default_str();
    sweep->add_option("--trials", spec.trials, "Rounds per cell")->capture_default_str();
    sweep->add_option("--seed", spec.seed, "Master seed")->capture_default_str();
    sweep->add_option("--avg-gain", spec.avg_gain, "Mean channel power gain")->capture_default_str();
    sweep->add_option("--rate", spec.rate, "Spectral efficiency R in bits/symbol")->capture_default_str();
    sweep->add_option("--max-attempts", spec.max_attempts, "Attempt cap M per link")->capture_default_str();
    sweep->add_option("--beta-max", spec.beta_max, "Upper bound of the timer offset, in slots")
        ->capture_default_str();
    sweep->add_option("--objective", objective, "Policy objective: delay|throughput")->capture_default_str();
    sweep->add_flag("--dual-objective", spec.dual_objective,
                    "Delay column from a delay-optimal policy, throughput column from a throughput-optimal one");
    sweep->add_flag("--analytic", spec.analytic, "Append closed-form values for the proposed scheme");
    sweep->add_flag("--eq12-literal", eq12_literal, "Divide by R in the throughput instead of multiplying");
    sweep->add_flag("--fdfr-exclusive", spec.fdfr_strict_relay_cap,
                    "FDFR relays need strictly fewer than M relay-link attempts");
    sweep->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    sweep->add_option("--output", sweep_output, "Output path (default stdout)");
    sweep->add_option("--workers", workers, "Worker threads per cell")->capture_default_str();
    sweep->add_option("--trace", trace_path, "JSON-lines file of per-round outcomes");
    sweep->add_option("--trace-rounds", trace_rounds, "Rounds traced per cell")->capture_default_str();

    // optimize-alpha
    Scenario opt_scenario;
    std::string opt_objective = "delay";
    std::string opt_output;
    std::string alpha_out;
    auto* optimize = app.add_subcommand("optimize-alpha", "Search the timer-class matrix");
    add_scenario_flags(*optimize, opt_scenario);
    optimize->add_option("--objective", opt_objective, "delay|throughput")->capture_default_str();
    optimize->add_option("--output", opt_output, "Output path (default stdout)");
    optimize->add_option("--alpha-out", alpha_out, "Also write the bare matrix JSON here");

    // analytic
    Scenario an_scenario;
    std::string alpha_path;
    std::string an_output;
    auto* analytic = app.add_subcommand("analytic", "Closed-form evaluation of a timer-class matrix");
    add_scenario_flags(*analytic, an_scenario);
    analytic->add_option("--alpha", alpha_path, "Matrix JSON file")->required();
    analytic->add_option("--output", an_output, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    CLI::App* active = sweep->parsed() ? sweep : optimize->parsed() ? optimize : analytic;
    try {
        if (active == sweep) {
            parse_snr_range(snr_range, spec);
            spec.num_relays_list = parse_int_list(relays);
            spec.schemes = parse_scheme_list(schemes);
            spec.objective = parse_objective(objective);
            spec.throughput_form = eq12_literal ? ThroughputForm::kDivideRate : ThroughputForm::kMultiplyRate;
            spec.validate();

            std::ofstream trace_file;
            SweepOptions options;
            options.workers = workers;
            if (!trace_path.empty()) {
                trace_file.open(trace_path, std::ios::binary);
                if (!trace_file)
                    throw std::runtime_error("cannot open '" + trace_path + "' for writing");
                options.trace = &trace_file;
                options.trace_rounds = trace_rounds;
            }

            const std::vector<SweepRow> rows = run_sweep(spec, options);
            std::ostringstream text;
            if (format == "json")
                write_json(text, rows);
            else
                write_csv(text, rows);
            emit(text.str(), sweep_output, out);

            int missing = 0;
            for (const SweepRow& r : rows)
                missing += (r.delay_run.no_feasible_rounds || r.throughput_run.no_feasible_rounds) ? 1 : 0;
            if (missing > 0) {
                err << "warning: " << missing << " cell(s) had no feasible round\n";
                return 1;
            }
            return 0;
        }

        if (active == optimize) {
            const FadingParams params = opt_scenario.params();
            const Objective obj = parse_objective(opt_objective);
            const OptimizationResult result = optimize_alpha(params, opt_scenario.num_relays, obj);
            const nlohmann::json doc = {{"alpha", to_json(result.alpha)},
                                        {"objective", to_string(obj)},
                                        {"objective_value", result.objective_value},
                                        {"sweeps", result.sweeps}};
            emit(doc.dump(2) + "\n", opt_output, out);
            if (!alpha_out.empty())
                emit(to_json(result.alpha).dump(2) + "\n", alpha_out, out);
            return 0;
        }

        const FadingParams params = an_scenario.params();
        nlohmann::json alpha_doc = read_json_file(alpha_path);
        // Accept the optimize-alpha document as well as a bare matrix.
        if (alpha_doc.is_object() && alpha_doc.contains("alpha"))
            alpha_doc = alpha_doc.at("alpha");
        const AlphaMatrix alpha = alpha_from_json(alpha_doc);
        if (alpha.max_attempts() != params.max_attempts())
            throw std::invalid_argument("alpha matrix is " + std::to_string(alpha.max_attempts()) + "x" +
                                        std::to_string(alpha.max_attempts()) + " but --max-attempts is " +
                                        std::to_string(params.max_attempts()));
        emit(evaluation_json(params, alpha, an_scenario.num_relays).dump(2) + "\n", an_output, out);
        return 0;
    } catch (const NoFeasibleConfiguration& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n\n" << active->help();
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace relayharq
