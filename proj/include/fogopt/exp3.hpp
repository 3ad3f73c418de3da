#pragma once

#include <string>
#include <vector>

#include "fogopt/core.hpp"
#include "fogopt/env.hpp"
#include "fogopt/trace.hpp"

namespace fogopt::exp3 {

using core::Mat;
using core::RngStream;
using core::Vec;

// Discrete action grid with a per-slot availability mask supplied by the
// environment.
struct ArmSet {
    std::vector<Vec> arms;

    std::size_t size() const { return arms.size(); }
};

// Exponential weights kept in log space; importance-weighted losses scale
// like 1/p and overflow raw exponentials quickly.
struct WeightState {
    Vec log_weights;
    Vec lambda;       // nonnegative dual prices
    double mu = 0.0;  // stepsize
    double delta_reg = 1.0;
    long slot = 0;
};

WeightState make_weight_state(std::size_t n_arms, std::size_t n_constraints, double mu,
                              double delta_reg);

// Distribution proportional to the weights on the available arms, zero
// elsewhere. Throws if no arm is available.
Vec restrict_distribution(const WeightState& state, const std::vector<bool>& mask);

struct Estimates {
    Vec loss;  // K-vector, nonzero only on the played arm
    Mat cons;  // N x K, nonzero only on the played column
};

// Importance-weighted single-observation estimates of the full tables.
Estimates importance_estimates(const Vec& p, std::size_t played, double loss_val,
                               const Vec& cons_val);

// Weight and dual recursion; the dual shrinks by delta_reg * mu^2 each step,
// which keeps the multiplier bounded by max(lambda0, g_max / (delta_reg * mu)).
WeightState exp3sp_step(const WeightState& state, const Vec& p, const Estimates& est);

double lambda_bound(double lambda0_max, double g_max, double mu, double delta_reg);

struct Exp3Config {
    double mu = 0.0;        // <= 0 resolves to c_mu / sqrt(T)
    double c_mu = 1.0;
    double delta_reg = 1.0;
};

// T slots of sample-play-estimate-update against an arm-value environment.
RunTrace run_exp3sp(env::ArmEnv& environment, const ArmSet& arms, Exp3Config cfg, long T,
                    RngStream rng);

}  // namespace fogopt::exp3
