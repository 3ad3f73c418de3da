#pragma once

#include <string>
#include <vector>

#include "fogopt/core.hpp"
#include "fogopt/env.hpp"
#include "fogopt/trace.hpp"

namespace fogopt::dual {

using core::BoxSet;
using core::Mat;
using core::RngStream;
using core::Vec;

// Problem family with an exact inner minimizer: separable convex quadratic
// objective, linear constraints shifted by the observed state, box decisions.
//   f(x)       = sum_i quad[i] x_i^2 + lin[i] x_i          (quad >= 0)
//   g(x; s)    = A x + s
struct QuadraticFamily {
    Vec quad;
    Vec lin;
    Mat a_mat;  // N x d
    BoxSet box;

    std::size_t dim() const { return quad.size(); }
    std::size_t n_constraints() const { return a_mat.rows; }

    double objective(const Vec& x) const;
    Vec constraint(const Vec& x, const Vec& s) const;
    void validate() const;
    // Upper bound on the dual gradient's Lipschitz constant, ||A||^2 / (2 q_min).
    double dual_smoothness() const;
};

// Exact minimizer of f(x) + theta' g(x; s) over the box: the per-coordinate
// clamp of the unconstrained quadratic minimizer.
Vec lagrangian_argmin(const QuadraticFamily& fam, const Vec& s, const Vec& theta);

// Empirical dual over a growing sample set, with an l2 regularizer of weight
// eps making it strongly concave.
struct DualErm {
    QuadraticFamily family;
    std::vector<Vec> samples;
    double eps = 0.1;

    std::size_t size() const { return samples.size(); }
    // Gradient of the unregularized per-sample dual at lambda (envelope form).
    Vec sample_gradient(std::size_t n, const Vec& lambda) const;
    // Value of the regularized empirical dual at lambda.
    double value(const Vec& lambda) const;
    // Condition number estimate (L + eps) / eps of the regularized dual.
    double condition_number() const;
};

// Whitespace-separated state vectors, one per line; '#' starts a comment.
std::vector<Vec> load_states(const std::string& path, std::size_t expected_dim);

// Per-sample gradient table with an incrementally maintained average.
struct SagaMemory {
    std::vector<Vec> stored_grads;
    Vec grad_sum;     // sum of stored gradients (average = sum / N)
    Vec iterate;      // current multiplier lambda_k

    std::size_t size() const { return stored_grads.size(); }
    Vec running_avg() const;
};

// Initializes the table with each sample's gradient at lambda0.
SagaMemory init_memory(const DualErm& erm, const Vec& lambda0);

// One variance-reduced ascent step on a uniformly drawn sample; the iterate
// stays nonnegative and the drawn slot is refreshed.
void saga_step(SagaMemory& mem, const DualErm& erm, double alpha, RngStream& rng);

// Appends the new state (gradient initialized at the current iterate), then
// runs K saga steps. Returns the refreshed multiplier.
Vec online_saga_slot(SagaMemory& mem, DualErm& erm, const Vec& s_t, int k_steps, double alpha,
                     RngStream& rng);

struct LearnAdaptConfig {
    double mu = 0.01;     // queue-price weight
    double bias_scale = 1.0;  // b = bias_scale * sqrt(mu) * 1
    int k_steps = 6;
    double alpha = 0.0;   // <= 0 derives the stepsize from the ERM curvature
};

struct LearnAdaptState {
    Vec lambda;
    double mu = 0.0;
    Vec bias;
};

// Effective price theta = [lambda + mu q - b]^+, clamped so a deep queue
// deficit cannot subsidize violations.
Vec effective_multiplier(const LearnAdaptState& st, const Vec& queues);

// One learn-and-adapt slot: refresh lambda via online SAGA, price with the
// queues, act, and advance the queues.
Vec la_saga_slot(LearnAdaptState& st, SagaMemory& mem, DualErm& erm, env::QueueNetwork& net,
                 const Vec& c_t, const LearnAdaptConfig& cfg, RngStream& rng);

// Plain stochastic dual ascent: lambda <- [lambda + alpha_t (g(x*(lambda;s);s)
// - eps lambda)]^+ for each streamed state.
struct SgdDualBaseline {
    const DualErm* erm = nullptr;  // provides family + regularizer
    Vec lambda;

    void step(const Vec& s_t, double alpha_t);
};

// Default SAGA stepsize for an eps-strongly-concave, L-smooth empirical dual
// with n samples.
double default_saga_alpha(const DualErm& erm);

// Batch solver used as ground truth: projected gradient ascent on the full
// regularized empirical dual until the iterate moves less than tol.
Vec solve_erm_optimum(const DualErm& erm, double tol, long max_iters = 2000000);

}  // namespace fogopt::dual
