#include "doctest.h"

#include "relayharq/sweep.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace relayharq;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "relayharq");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string csv(const SweepSpec& spec, unsigned workers = 1)
{
    SweepOptions options;
    options.workers = workers;
    std::ostringstream out;
    write_csv(out, run_sweep(spec, options));
    return out.str();
}

std::vector<std::string> lines(const std::string& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& content)
{
    const auto path = std::filesystem::temp_directory_path() / ("relayharq_test_" + name);
    std::ofstream(path) << content;
    return path;
}

} // namespace

TEST_CASE("argument parsing")
{
    SweepSpec spec;
    parse_snr_range("-4:12.5:0.5", spec);
    CHECK(spec.snr_db_min == -4.0);
    CHECK(spec.snr_db_max == 12.5);
    CHECK(spec.snr_db_step == 0.5);
    CHECK_THROWS_AS(parse_snr_range("0:20", spec), std::invalid_argument);
    CHECK_THROWS_AS(parse_snr_range("0:x:2", spec), std::invalid_argument);
    CHECK(parse_int_list("5,10") == std::vector<int>{5, 10});
    CHECK_THROWS_AS(parse_int_list("5,,10"), std::invalid_argument);
    CHECK_THROWS_AS(parse_int_list("5a"), std::invalid_argument);
    CHECK(parse_scheme_list("optimal,fdfr") == std::vector<Scheme>{Scheme::kOptimal, Scheme::kFdfr});
    CHECK_THROWS_AS(parse_scheme_list("proposed,genie"), std::invalid_argument);
}

TEST_CASE("sweep spec validation and grid")
{
    SweepSpec spec;
    CHECK(spec.snr_grid_db().size() == 11);
    CHECK(spec.snr_grid_db().back() == 20.0);
    spec.snr_db_step = 0.1;
    spec.snr_db_max = 1.0;
    CHECK(spec.snr_grid_db().size() == 11);

    SweepSpec bad;
    bad.snr_db_step = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SweepSpec{};
    bad.snr_db_min = 5.0;
    bad.snr_db_max = 4.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SweepSpec{};
    bad.schemes.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SweepSpec{};
    bad.num_relays_list = {0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SweepSpec{};
    bad.max_attempts = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sweep table")
{
    SweepSpec spec;
    spec.trials = 300;
    spec.seed = 7;
    spec.analytic = true;
    const std::string table = csv(spec);
    const auto rows = lines(table);
    REQUIRE(rows.size() == 1 + 66);
    CHECK(rows[0] == "snr_db,num_relays,scheme,trials,seed,mean_delay,delay_stderr,throughput,throughput_stderr,"
                     "feasibility_rate,analytic_delay,analytic_throughput");
    CHECK(rows[1].rfind("0,5,proposed,300,7,", 0) == 0);
    CHECK(rows[2].rfind("0,5,fdfr,300,7,", 0) == 0);
    CHECK(rows[2].substr(rows[2].size() - 2) == ",,");
    CHECK(rows[1].substr(rows[1].size() - 2) != ",,");

    CHECK(csv(spec) == table);
    CHECK(csv(spec, 3) == table);

    SUBCASE("adding a scheme leaves other cells alone")
    {
        SweepSpec only = spec;
        only.schemes = {Scheme::kFdfr};
        const auto fd_rows = lines(csv(only));
        REQUIRE(fd_rows.size() == 1 + 22);
        CHECK(fd_rows[1] == rows[2]);
        CHECK(fd_rows[22] == rows[65]);
    }
}

TEST_CASE("dual-objective sweep")
{
    SweepSpec spec;
    spec.snr_db_min = 0.0;
    spec.snr_db_max = 0.0;
    spec.num_relays_list = {5};
    spec.schemes = {Scheme::kProposed};
    spec.trials = 2000;
    spec.dual_objective = true;
    spec.analytic = true;
    const auto rows = run_sweep(spec);
    REQUIRE(rows.size() == 1);
    const SweepRow& r = rows[0];
    REQUIRE(r.delay_alpha);
    REQUIRE(r.throughput_alpha);
    const FadingParams p(1.0, 1.0, 1.0, 4);
    CHECK(*r.delay_alpha == optimize_alpha(p, 5, Objective::kMinDelay).alpha);
    CHECK(*r.throughput_alpha == optimize_alpha(p, 5, Objective::kMaxThroughput).alpha);
    CHECK(*r.analytic_throughput == evaluate_policy(*r.throughput_alpha, joint_pmf(p), 5, 1.0).throughput);
    CHECK(r.throughput == r.throughput_run.throughput);
    CHECK(r.mean_delay == r.delay_run.mean_delay);
}

TEST_CASE("json output and traces")
{
    SweepSpec spec;
    spec.snr_db_min = 2.0;
    spec.snr_db_max = 4.0;
    spec.num_relays_list = {3};
    spec.trials = 100;
    std::ostringstream trace;
    SweepOptions options;
    options.trace = &trace;
    options.trace_rounds = 4;
    const auto rows = run_sweep(spec, options);
    std::ostringstream out;
    write_json(out, rows);
    const nlohmann::json doc = nlohmann::json::parse(out.str());
    REQUIRE(doc.size() == 6);
    CHECK(doc[0].at("scheme") == "proposed");
    CHECK(doc[1].at("analytic_delay").is_null());
    const auto trace_lines = lines(trace.str());
    REQUIRE(trace_lines.size() == 6 * 4);
    const nlohmann::json rec = nlohmann::json::parse(trace_lines[0]);
    CHECK(rec.at("trial") == 0);
    CHECK(rec.contains("delay_slots"));
}

TEST_CASE("command line: sweep")
{
    const CliResult ok = cli({"sweep", "--snr-db", "0:4:2", "--relays", "2", "--trials", "50", "--seed", "3",
                              "--schemes", "proposed,optimal", "--workers", "2"});
    CHECK(ok.code == 0);
    CHECK(lines(ok.out).size() == 1 + 3 * 2);

    const CliResult json = cli({"sweep", "--snr-db", "0:0:1", "--relays", "2", "--trials", "50", "--format", "json"});
    CHECK(json.code == 0);
    CHECK(nlohmann::json::parse(json.out).size() == 3);

    const CliResult range = cli({"sweep", "--snr-db", "10:0:2"});
    CHECK(range.code != 0);
    CHECK(range.err.find("Usage") != std::string::npos);
    const CliResult step = cli({"sweep", "--snr-db", "0:10:0"});
    CHECK(step.code != 0);
    const CliResult scheme = cli({"sweep", "--schemes", "proposed,random"});
    CHECK(scheme.code != 0);
    CHECK(scheme.err.find("random") != std::string::npos);

    const CliResult dead = cli({"sweep", "--snr-db", "-100:-100:1", "--relays", "2", "--trials", "20",
                                "--schemes", "fdfr"});
    CHECK(dead.code != 0);
    CHECK(lines(dead.out).size() == 2);
}

TEST_CASE("command line: optimize-alpha and analytic")
{
    const CliResult one = cli({"optimize-alpha", "--max-attempts", "1"});
    REQUIRE(one.code == 0);
    CHECK(nlohmann::json::parse(one.out).at("alpha").at("entries") == nlohmann::json::parse("[[1]]"));

    const CliResult none = cli({"optimize-alpha", "--max-attempts", "2", "--snr", "1e-10"});
    CHECK(none.code == 1);
    CHECK(none.err.find("no feasible relay configuration") != std::string::npos);

    for (const char* objective : {"delay", "throughput"}) {
        const CliResult opt = cli({"optimize-alpha", "--snr-db", "3", "--relays", "5", "--objective", objective});
        REQUIRE(opt.code == 0);
        const nlohmann::json result = nlohmann::json::parse(opt.out);
        const auto path = temp_file(std::string("alpha_") + objective + ".json", opt.out);
        const CliResult an = cli({"analytic", "--snr-db", "3", "--relays", "5", "--alpha", path.string()});
        REQUIRE(an.code == 0);
        const nlohmann::json eval = nlohmann::json::parse(an.out);
        const char* key = std::string(objective) == "delay" ? "expected_delay" : "throughput";
        CHECK(eval.at(key).get<double>() == result.at("objective_value").get<double>());
        std::filesystem::remove(path);
    }

    const auto first = temp_file("first.json", to_json(AlphaMatrix::first_decode(4)).dump());
    const CliResult pmf = cli({"analytic", "--snr", "1", "--alpha", first.string()});
    REQUIRE(pmf.code == 0);
    const nlohmann::json eval = nlohmann::json::parse(pmf.out);
    CHECK(eval.at("pmf").at("probs")[0].get<double>() == doctest::Approx(0.36787944117144233).epsilon(1e-14));
    CHECK(eval.contains("throughput_eq12_literal"));

    const auto single = temp_file("single.json", R"({"max_attempts":1,"entries":[[1]]})");
    const CliResult m1 = cli({"analytic", "--max-attempts", "1", "--alpha", single.string()});
    REQUIRE(m1.code == 0);
    CHECK(nlohmann::json::parse(m1.out).at("expected_delay").get<double>() == 2.0);

    const CliResult size = cli({"analytic", "--max-attempts", "3", "--alpha", first.string()});
    CHECK(size.code != 0);
    const auto broken = temp_file("broken.json", "{\"max_attempts\": 2, \"entries\": ");
    CHECK(cli({"analytic", "--max-attempts", "2", "--alpha", broken.string()}).code != 0);
    const auto invalid = temp_file("invalid.json", R"({"max_attempts":2,"entries":[[1,1],[1,2]]})");
    CHECK(cli({"analytic", "--max-attempts", "2", "--alpha", invalid.string()}).code != 0);
    CHECK(cli({"analytic"}).code != 0);
    for (const auto& p : {first, single, broken, invalid})
        std::filesystem::remove(p);
}
