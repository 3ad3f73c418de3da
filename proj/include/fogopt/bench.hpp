#pragma once

#include <optional>
#include <vector>

#include "fogopt/core.hpp"
#include "fogopt/env.hpp"
#include "fogopt/trace.hpp"

namespace fogopt::bench {

using core::BoxSet;
using core::Mat;
using core::Vec;
using env::SlotFunctions;

// Per-slot clairvoyant minimizers with their losses and accumulated movement.
struct Comparator {
    std::vector<Vec> optima;
    Vec optimal_losses;
    double path_variation = 0.0;
};

struct SlopeEstimate {
    double slope = 0.0;
    std::size_t n_used = 0;
    bool all_excluded = false;  // every value was <= 0: better than any power law
    double r_squared = 0.0;
    double std_error = 0.0;  // standard error of the fitted slope
};

struct MetricReport {
    double regret = 0.0;
    double fit = 0.0;
    double path_variation = 0.0;
    Vec regret_prefix;  // length T
    Vec fit_prefix;     // length T
};

// Solves min f_t(x) s.t. g_t(x) <= 0, x in the box, to KKT residual <= tol.
// Runs a dual iteration with exact inner minimization when the slot carries a
// separable quadratic form, and a nested projected-gradient loop otherwise.
// `warm_lambda`, when given, seeds and receives the dual solution.
Vec clairvoyant_slot(const SlotFunctions& slot_fns, const BoxSet& set, double tol,
                     Vec* warm_lambda = nullptr);

// Regret of the trace's played losses against the comparator sequence.
double dynamic_regret(const RunTrace& trace, const Comparator& comp);

// l2 norm of the positive part of the summed constraint values; violations can
// be repaid by later slack.
double dynamic_fit(const RunTrace& trace);

// Least-squares slope of log(value) against log(horizon). Nonpositive values
// are excluded; fewer than 4 usable points is reported rather than guessed.
SlopeEstimate slope_estimate(const std::vector<long>& horizons, const Vec& values);

// Full per-run metrics from a trace and its comparator.
MetricReport metric_report(const RunTrace& trace, const Comparator& comp);

// Fit-only metrics when no comparator exists (queue or arm runs).
MetricReport metric_report(const RunTrace& trace);

// Replays a fog environment and solves every slot; throws if any slot is
// infeasible or a solve misses the tolerance.
Comparator build_fog_comparator(env::FogOcoEnv& environment, long T, double tol = 1e-8);

// Exact small LP for the best fixed distribution: min f_sum' p subject to
// g_sum p <= 0 on the probability simplex, solved by vertex enumeration.
Vec best_fixed_distribution(const Vec& f_sum, const Mat& g_sum);

}  // namespace fogopt::bench
