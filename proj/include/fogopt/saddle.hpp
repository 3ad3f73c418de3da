#pragma once

#include <cstdint>
#include <string>

#include "fogopt/core.hpp"
#include "fogopt/env.hpp"
#include "fogopt/trace.hpp"

namespace fogopt::saddle {

using core::BoxSet;
using core::RngStream;
using core::ShrunkSet;
using core::Vec;
using env::FeedbackMode;
using env::SlotFunctions;

// Multipliers are nonnegative price vectors; kept as plain Vec, the updates
// enforce the sign.
using Multiplier = Vec;

struct SaddleConfig {
    double alpha = 0.0;   // primal stepsize; <= 0 means use c_alpha scaling
    double mu = 0.0;      // dual stepsize; <= 0 means use c_mu scaling
    bool adaptive = false;
    double eps0 = 1e-6;   // adaptive stepsize floor
    double delta = 0.0;   // exploration radius (bandit); <= 0 means c_delta scaling
    double gamma = 0.0;   // shrinkage (bandit); derived as delta / inradius when 0
    int m_evals = 1;      // function evaluations per slot (bandit)
    // stepsize scalings applied when resolving for a horizon T
    double c_alpha = 1.0;
    double c_mu = 1.0;
    double c_delta = 1.0;

    void validate_bandit(const BoxSet& box) const;
};

// Fills alpha/mu/delta/gamma for horizon T from the configured constants:
// full info uses alpha = mu = c/sqrt(T); one-point uses alpha = c/T^{3/4},
// delta = c/T^{1/4}; multi-point uses alpha = c/sqrt(T) with the same delta.
SaddleConfig resolve_for_horizon(SaddleConfig cfg, long T, FeedbackMode mode, const BoxSet& box);

struct AlgoState {
    Vec x_hat;              // current (center) point
    Multiplier lambda;      // dual prices
    Vec grad_accum;         // per-coordinate squared-gradient sums (adaptive)
    long slot = 0;
};

AlgoState make_state(const Vec& x0, std::size_t n_constraints);

// Full-information primal-dual step. Dual ascends along the first-order
// prediction of g at the next primal point, not g itself.
AlgoState mosp_step(const AlgoState& state, SlotFunctions& slot_fns, const SaddleConfig& cfg,
                    const BoxSet& set);

struct GradientEstimate {
    Vec grad;                     // estimated loss gradient at x_hat
    std::vector<Vec> eval_points; // the points spent on feedback
    double mean_loss = 0.0;       // average of the observed values
};

// Single random evaluation at x_hat + delta * u, scaled into a gradient
// surrogate. The evaluation point is the action actually played.
GradientEstimate one_point_gradient(SlotFunctions& slot_fns, const Vec& x_hat, double delta,
                                    RngStream& rng);

// M/2 symmetric-difference pairs averaged over independent directions.
GradientEstimate multi_point_gradient(SlotFunctions& slot_fns, const Vec& x_hat, double delta,
                                      int m_evals, RngStream& rng);

// Bandit step: primal update projected onto the shrunk set using the supplied
// loss-gradient estimate; constraints enter exactly.
AlgoState bansp_step(const AlgoState& state, SlotFunctions& slot_fns, const Vec& grad_estimate,
                     const SaddleConfig& cfg, const ShrunkSet& shrunk);

enum class SaddleAlgo { Mosp, BanspOnePoint, BanspMultiPoint };

std::string to_string(SaddleAlgo a);
FeedbackMode required_feedback(SaddleAlgo a);

// Plays T slots of the fog environment and records the per-slot trace.
// Deterministic given the environment seed and `perturb_rng`.
RunTrace run_saddle(env::FogOcoEnv& environment, SaddleAlgo algo, SaddleConfig cfg, long T,
                    RngStream perturb_rng);

}  // namespace fogopt::saddle
