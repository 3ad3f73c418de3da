#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fogopt/core.hpp"

namespace fogopt {

// One slot of a run: the played decision and everything observed with it.
struct TraceRow {
    long slot = 0;
    core::Vec decision;
    double loss = 0.0;
    core::Vec constraint;
    core::Vec queue;       // empty unless the run has queue state
    core::Vec multiplier;  // empty for plain RL runs
    core::Vec probs;       // sampling distribution, arm-value runs only
    long arm = -1;         // played arm index, arm-value runs only
    std::uint64_t rng_calls = 0;  // cumulative draws on the algorithm stream
};

struct RunTrace {
    std::string algorithm;
    std::string environment;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version;
    std::vector<TraceRow> rows;

    long horizon() const { return static_cast<long>(rows.size()); }
};

// Column-exact CSV persistence; doubles round-trip bit-exactly.
std::string trace_to_csv(const RunTrace& trace);
RunTrace trace_from_csv(const std::string& text);
void write_trace_csv(const RunTrace& trace, const std::string& path);
RunTrace read_trace_csv(const std::string& path);

// Shared artifact version string stamped into trace headers.
extern const char* kArtifactVersion;

// Round-trippable double formatting used across all persisted artifacts.
std::string format_double(double v);

}  // namespace fogopt
