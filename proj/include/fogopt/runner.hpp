#pragma once

#include <map>
#include <string>
#include <vector>

#include "fogopt/bench.hpp"
#include "fogopt/config.hpp"
#include "fogopt/trace.hpp"

namespace fogopt::runner {

// Flat key-value report; keys with dots group into sections when written.
using Report = std::map<std::string, std::string>;

struct RunResult {
    long horizon = 0;
    std::uint64_t seed = 0;
    RunTrace trace;
    Report report;
    bench::MetricReport metrics;
    bool has_comparator = false;
};

// Executes one (horizon, seed) cell of the sweep. Pure function of the config
// and the pair; all randomness flows through streams keyed by the seed.
RunResult run_single(const config::ExperimentConfig& cfg, long horizon, std::uint64_t seed);

// Writes `<algo>_<env>_T<horizon>_s<seed>.{trace.csv,report.txt[,svg]}`.
void emit_outputs(const RunResult& res, const config::ExperimentConfig& cfg);

// Full sweep with a worker pool; writes per-run artifacts plus
// `summary.report.txt`, and returns the summary. Worker count resolves from
// config, then the FOGOPT_WORKERS environment variable, then the hardware.
Report run_sweep(const config::ExperimentConfig& cfg);

// CLI verbs. Exit codes: 0 success, 2 validation failure, 1 runtime failure.
int cmd_run(const std::string& config_path);
int cmd_validate(const std::string& config_path);
int cmd_plot(const std::vector<std::string>& trace_paths);
int cmd_report(const std::string& sweep_dir);

std::string report_to_text(const Report& rep);
Report report_from_text(const std::string& text);

}  // namespace fogopt::runner
