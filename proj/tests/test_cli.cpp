#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fogopt/config.hpp"
#include "fogopt/runner.hpp"

using namespace fogopt;
using namespace fogopt::config;
namespace fs = std::filesystem;

namespace {

std::string small_fog_config(const std::string& outdir, const std::string& extra = "") {
    return "[experiment]\n"
           "name = smoke\n"
           "seeds = 1 2\n"
           "horizons = 64 128 256 512\n"
           "output_dir = " + outdir + "\n"
           "benchmark = true\n"
           "plots = true\n"
           "[algorithm]\n"
           "id = mosp\n"
           "[environment]\n"
           "id = fog\n"
           "nodes = 2\n"
           "[environment.demand]\n"
           "kind = markov-ar1\n"
           "lo = 0.4\n"
           "hi = 0.6\n"
           "rho = 0.9\n" + extra;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// minimal well-formedness check: declaration, balanced tags, quoted attributes
void check_xml_well_formed(const std::string& text) {
    REQUIRE(text.rfind("<?xml", 0) == 0);
    std::vector<std::string> stack;
    std::size_t i = text.find('>') + 1;  // skip the declaration
    int roots = 0;
    while (i < text.size()) {
        const std::size_t lt = text.find('<', i);
        if (lt == std::string::npos) break;
        const std::size_t gt = text.find('>', lt);
        REQUIRE(gt != std::string::npos);
        std::string tag = text.substr(lt + 1, gt - lt - 1);
        REQUIRE_FALSE(tag.empty());
        if (tag[0] == '/') {
            REQUIRE_FALSE(stack.empty());
            REQUIRE(stack.back() == tag.substr(1));
            stack.pop_back();
        } else {
            const bool self_close = tag.back() == '/';
            if (self_close) tag.pop_back();
            // quotes must pair up inside the tag
            REQUIRE(std::count(tag.begin(), tag.end(), '"') % 2 == 0);
            const std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
            if (stack.empty()) ++roots;
            if (!self_close) stack.push_back(name);
        }
        i = gt + 1;
    }
    CHECK(stack.empty());
    CHECK(roots == 1);
}

}  // namespace

TEST_CASE("config parsing, sections, and permutation-stable hashing") {
    const ConfigMap a = ConfigMap::parse(
        "# comment\n[experiment]\nseeds = 1 2 3\nhorizons = 10\n[algorithm]\nid = mosp\n");
    CHECK(a.get_longs("experiment.seeds") == std::vector<long>{1, 2, 3});
    CHECK(a.get_string("algorithm.id") == "mosp");
    CHECK(a.get_double("experiment.horizons") == 10.0);
    CHECK_THROWS_AS(a.get_string("experiment.missing"), ValidationError);
    CHECK_THROWS_AS((void)ConfigMap::parse("keyless line\n"), std::runtime_error);

    const ConfigMap b = ConfigMap::parse(
        "[algorithm]\nid = mosp\n[experiment]\nhorizons = 10\nseeds = 1 2 3\n");
    CHECK(a.hash() == b.hash());
    ConfigMap c = b;
    c.set("experiment.horizons", "20");
    CHECK(a.hash() != c.hash());
}

TEST_CASE("experiment validation names the offending field") {
    auto parse = [](const std::string& text) {
        return load_experiment(ConfigMap::parse(text));
    };
    CHECK_THROWS_WITH_AS(parse("[experiment]\nseeds = 1\nhorizons = 10\n"
                               "[algorithm]\nid = mosp\n[environment]\nid = arms\n"),
                         doctest::Contains("feedback"), ValidationError);
    CHECK_THROWS_WITH_AS(parse("[experiment]\nhorizons = 10\n"
                               "[algorithm]\nid = mosp\n[environment]\nid = fog\n"),
                         doctest::Contains("experiment.seeds"), ValidationError);
    CHECK_THROWS_WITH_AS(parse("[experiment]\nseeds = 1\nhorizons = 0\n"
                               "[algorithm]\nid = mosp\n[environment]\nid = fog\n"),
                         doctest::Contains("experiment.horizons"), ValidationError);
    CHECK_THROWS_WITH_AS(parse("[experiment]\nseeds = 1\nhorizons = 4\n"
                               "[algorithm]\nid = nope\n[environment]\nid = fog\n"),
                         doctest::Contains("algorithm.id"), ValidationError);
    // declared feedback must agree with the algorithm
    CHECK_THROWS_WITH_AS(parse("[experiment]\nseeds = 1\nhorizons = 4\n"
                               "[algorithm]\nid = mosp\n[environment]\nid = fog\n"
                               "feedback = one-point\n"),
                         doctest::Contains("feedback"), ValidationError);
    const ExperimentConfig ok = parse(
        "[experiment]\nseeds = 1\nhorizons = 4\n[algorithm]\nid = qlearn\n"
        "[environment]\nid = mdp\n");
    CHECK(ok.algo == AlgoKind::QLearn);
}

TEST_CASE("config typed accessors reject malformed values") {
    const ConfigMap m = ConfigMap::parse(
        "[a]\nflag = maybe\nnums = 1 2 x\nword = seven\n");
    CHECK_THROWS_AS(m.get_bool("a.flag", true), ValidationError);
    CHECK_THROWS_AS(m.get_doubles("a.nums"), ValidationError);
    CHECK_THROWS_AS(m.get_double("a.word"), ValidationError);
    CHECK_THROWS_AS(m.get_long("a.word"), ValidationError);
    CHECK(m.get_double("a.absent", 2.5) == 2.5);
    CHECK(m.get_bool("a.absent", true));
}

TEST_CASE("trace parsing rejects ragged rows and unknown columns") {
    CHECK_THROWS_AS(trace_from_csv("slot,x0,loss,arm,rng_calls\n0,1.0,2.0\n"),
                    std::runtime_error);
    CHECK_THROWS_AS(trace_from_csv("slot,zz,loss,arm,rng_calls\n0,1.0,2.0,0,0\n"),
                    std::runtime_error);
}

TEST_CASE("trace csv round-trips bit-exactly") {
    RunTrace t;
    t.algorithm = "mosp";
    t.environment = "fog";
    t.config_hash = "deadbeef00000000";
    t.seed = 42;
    t.version = kArtifactVersion;
    core::RngStream rng(3, 9);
    for (int i = 0; i < 50; ++i) {
        TraceRow row;
        row.slot = i;
        row.decision = {rng.gaussian() * 1e-7, rng.uniform(0, 1e9), -rng.uniform01()};
        row.loss = rng.gaussian();
        row.constraint = {rng.gaussian(), rng.gaussian()};
        row.queue = {rng.uniform(0, 10)};
        row.multiplier = {rng.uniform01()};
        row.probs = {rng.uniform01(), rng.uniform01()};
        row.arm = i % 3;
        row.rng_calls = rng.calls();
        t.rows.push_back(row);
    }
    const RunTrace back = trace_from_csv(trace_to_csv(t));
    REQUIRE(back.rows.size() == t.rows.size());
    CHECK(back.algorithm == t.algorithm);
    CHECK(back.seed == t.seed);
    CHECK(back.config_hash == t.config_hash);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        CHECK(back.rows[i].decision == t.rows[i].decision);
        CHECK(back.rows[i].loss == t.rows[i].loss);
        CHECK(back.rows[i].constraint == t.rows[i].constraint);
        CHECK(back.rows[i].queue == t.rows[i].queue);
        CHECK(back.rows[i].multiplier == t.rows[i].multiplier);
        CHECK(back.rows[i].probs == t.rows[i].probs);
        CHECK(back.rows[i].arm == t.rows[i].arm);
        CHECK(back.rows[i].rng_calls == t.rows[i].rng_calls);
    }
}

TEST_CASE("single-slot traces carry a header and one data row") {
    RunTrace t;
    TraceRow row;
    row.slot = 0;
    row.decision = {1.0};
    row.loss = 0.5;
    t.rows.push_back(row);
    const std::string csv = trace_to_csv(t);
    std::size_t data_lines = 0, header_lines = 0;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("slot", 0) == 0) ++header_lines;
        else ++data_lines;
    }
    CHECK(header_lines == 1);
    CHECK(data_lines == 1);
}

TEST_CASE("experiment reruns are byte-identical and summaries carry slopes") {
    const std::string dir1 = "cli_out_a", dir2 = "cli_out_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    const ExperimentConfig cfg1 =
        load_experiment(ConfigMap::parse(small_fog_config(dir1)));
    const ExperimentConfig cfg2 =
        load_experiment(ConfigMap::parse(small_fog_config(dir2)));
    const runner::Report s1 = runner::run_sweep(cfg1);
    const runner::Report s2 = runner::run_sweep(cfg2);
    // one fit-slope and one regret-slope entry over the m = 4 horizons
    CHECK(s1.count("slopes.regret") == 1);
    CHECK(s1.count("slopes.fit") == 1);
    CHECK(s1.at("sweep.horizons") == "64 128 256 512");

    std::size_t compared = 0;
    for (const auto& ent : fs::directory_iterator(dir1)) {
        const std::string name = ent.path().filename().string();
        const std::string other = dir2 + "/" + name;
        REQUIRE(fs::exists(other));
        if (name.find(".trace.csv") != std::string::npos) {
            CHECK(slurp(ent.path().string()) == slurp(other));
            ++compared;
        }
    }
    CHECK(compared == 8);  // 4 horizons x 2 seeds

    // deleting outputs and rerunning reproduces them bit for bit
    const std::string probe = dir1 + "/mosp_fog_T64_s1.trace.csv";
    const std::string before = slurp(probe);
    fs::remove_all(dir1);
    (void)runner::run_sweep(cfg1);
    CHECK(slurp(probe) == before);

    // emitted charts are well-formed XML
    bool saw_svg = false;
    for (const auto& ent : fs::directory_iterator(dir1)) {
        if (ent.path().extension() == ".svg") {
            check_xml_well_formed(slurp(ent.path().string()));
            saw_svg = true;
        }
    }
    CHECK(saw_svg);

    // the report verb recomputes slopes from the run reports
    CHECK(runner::cmd_report(dir1) == 0);
    const std::string summary = slurp(dir1 + "/summary.report.txt");
    CHECK(summary.find("slopes") != std::string::npos);

    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("parallel sweeps write the same bytes as sequential ones") {
    const std::string dir1 = "cli_seq", dir2 = "cli_par";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    ExperimentConfig seq = load_experiment(ConfigMap::parse(small_fog_config(dir1)));
    ExperimentConfig par = load_experiment(ConfigMap::parse(small_fog_config(dir2)));
    seq.workers = 1;
    par.workers = 3;
    (void)runner::run_sweep(seq);
    (void)runner::run_sweep(par);
    for (const auto& ent : fs::directory_iterator(dir1)) {
        const std::string name = ent.path().filename().string();
        CHECK(slurp(ent.path().string()) == slurp(dir2 + "/" + name));
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("run and validate verbs succeed and fail with the documented codes") {
    const std::string dir = "cli_verbs";
    fs::remove_all(dir);
    const std::string cfg_path = "cli_verbs_config.txt";
    {
        std::ofstream os(cfg_path);
        os << small_fog_config(dir);
    }
    CHECK(runner::cmd_validate(cfg_path) == 0);
    {
        std::ofstream os(cfg_path);
        os << "[experiment]\nseeds = 1\nhorizons = 8\n[algorithm]\nid = mosp\n"
              "[environment]\nid = arms\n";
    }
    CHECK(runner::cmd_validate(cfg_path) == 2);
    CHECK(runner::cmd_run(cfg_path) == 2);
    CHECK(runner::cmd_run("does_not_exist.txt") == 1);
    fs::remove(cfg_path.c_str());
    fs::remove_all(dir);
}

TEST_CASE("adaptive stepsizes and fog-grid arms run end to end") {
    const std::string dir = "cli_extra";
    fs::remove_all(dir);
    {
        ExperimentConfig cfg = load_experiment(ConfigMap::parse(
            "[experiment]\nseeds = 3\nhorizons = 64\noutput_dir = " + dir +
            "\nbenchmark = true\n[algorithm]\nid = mosp\nadaptive = true\neps0 = 1e-6\n"
            "[environment]\nid = fog\nnodes = 2\n[environment.demand]\nkind = iid-uniform\n"
            "lo = 0.3\nhi = 0.6\n"));
        const runner::RunResult res = runner::run_single(cfg, 64, 3);
        CHECK(res.trace.rows.size() == 64);
        CHECK(res.report.count("metrics.regret") == 1);
    }
    {
        ExperimentConfig cfg = load_experiment(ConfigMap::parse(
            "[experiment]\nseeds = 3\nhorizons = 128\noutput_dir = " + dir +
            "\nbenchmark = true\n[algorithm]\nid = exp3sp\n"
            "[environment]\nid = arms-fog-grid\nnodes = 1\ngrid_per_dim = 3\ndeadline = 1.0\n"
            "availability = iid\navailability_rate = 0.9\n"
            "[environment.demand]\nkind = iid-uniform\nlo = 0.4\nhi = 0.6\n"));
        const runner::RunResult res = runner::run_single(cfg, 128, 3);
        CHECK(res.trace.rows.size() == 128);
        // 9 grid arms over the 2-D single-node decision
        CHECK(res.trace.rows.front().probs.size() == 9);
        CHECK(res.report.count("metrics.regret") == 1);
    }
    fs::remove_all(dir);
}

TEST_CASE("la-saga accepts a historical state file for the offline phase") {
    const std::string dir = "cli_states";
    const std::string states = "cli_states_hist.txt";
    fs::remove_all(dir);
    {
        std::ofstream os(states);
        // exogenous vectors: arrivals minus service for a 2-node network
        for (int i = 0; i < 40; ++i) os << 0.4 + 0.001 * i << " " << -0.9 - 0.001 * i << "\n";
    }
    ExperimentConfig cfg = load_experiment(ConfigMap::parse(
        "[experiment]\nseeds = 4\nhorizons = 256\noutput_dir = " + dir +
        "\nbenchmark = true\n[algorithm]\nid = la-saga\nmu = 0.05\noffline_states_file = " +
        states +
        "\n[environment]\nid = queue-net\nnodes = 2\nedges = 0:1\nservice = 0.2 1.2\n"
        "[environment.demand]\nkind = iid-uniform\nlo = 0.5\nhi = 0.7\n"));
    const runner::RunResult res = runner::run_single(cfg, 256, 4);
    CHECK(res.trace.rows.size() == 256);
    CHECK(res.report.at("algorithm.offline_size_ok") == "true");
    fs::remove(states.c_str());
    fs::remove_all(dir);
}

TEST_CASE("plot verb renders charts for stored traces") {
    const std::string dir = "cli_plotdir";
    fs::remove_all(dir);
    ExperimentConfig cfg = load_experiment(ConfigMap::parse(
        "[experiment]\nseeds = 5\nhorizons = 32\noutput_dir = " + dir +
        "\nbenchmark = false\n[algorithm]\nid = mosp\n[environment]\nid = fog\nnodes = 2\n"));
    (void)runner::run_sweep(cfg);
    const std::string trace = dir + "/mosp_fog_T32_s5.trace.csv";
    REQUIRE(fs::exists(trace));
    CHECK(runner::cmd_plot({trace}) == 0);
    check_xml_well_formed(slurp(dir + "/mosp_fog_T32_s5.svg"));
    fs::remove_all(dir);
}
