#include "fogopt/exp3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fogopt::exp3 {

WeightState make_weight_state(std::size_t n_arms, std::size_t n_constraints, double mu,
                              double delta_reg) {
    if (n_arms < 1) throw std::invalid_argument("make_weight_state: need at least one arm");
    if (delta_reg <= 0.0) throw std::invalid_argument("make_weight_state: delta_reg must be > 0");
    WeightState st;
    st.log_weights.assign(n_arms, 0.0);
    st.lambda.assign(n_constraints, 0.0);
    st.mu = mu;
    st.delta_reg = delta_reg;
    return st;
}

Vec restrict_distribution(const WeightState& state, const std::vector<bool>& mask) {
    if (mask.size() != state.log_weights.size())
        throw std::invalid_argument("restrict_distribution: mask size mismatch");
    double max_lw = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < mask.size(); ++k)
        if (mask[k]) max_lw = std::max(max_lw, state.log_weights[k]);
    if (!std::isfinite(max_lw))
        throw std::invalid_argument("restrict_distribution: empty availability");
    Vec p(mask.size(), 0.0);
    double z = 0.0;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (!mask[k]) continue;
        p[k] = std::exp(state.log_weights[k] - max_lw);
        z += p[k];
    }
    for (auto& v : p) v /= z;
    return p;
}

Estimates importance_estimates(const Vec& p, std::size_t played, double loss_val,
                               const Vec& cons_val) {
    if (played >= p.size()) throw std::invalid_argument("importance_estimates: bad arm index");
    if (!(p[played] > 0.0))
        throw std::invalid_argument("importance_estimates: played arm had probability 0");
    Estimates est;
    est.loss.assign(p.size(), 0.0);
    est.cons = Mat(cons_val.size(), p.size());
    est.loss[played] = loss_val / p[played];
    for (std::size_t n = 0; n < cons_val.size(); ++n) est.cons(n, played) = cons_val[n] / p[played];
    return est;
}

WeightState exp3sp_step(const WeightState& state, const Vec& p, const Estimates& est) {
    const std::size_t K = state.log_weights.size();
    const std::size_t N = state.lambda.size();
    if (est.loss.size() != K || est.cons.cols != K || est.cons.rows != N)
        throw std::invalid_argument("exp3sp_step: estimate shape mismatch");
    WeightState next = state;
    for (std::size_t k = 0; k < K; ++k) {
        double price = est.loss[k];
        for (std::size_t n = 0; n < N; ++n) price += state.lambda[n] * est.cons(n, k);
        if (!std::isfinite(price))
            throw std::runtime_error("exp3sp_step: nonfinite estimate (probability underflow)");
        next.log_weights[k] -= state.mu * price;
    }
    // renormalize in log space; the restricted distribution is scale invariant
    const double max_lw = *std::max_element(next.log_weights.begin(), next.log_weights.end());
    for (auto& lw : next.log_weights) lw -= max_lw;

    Vec gp = est.cons.mul(p);
    for (std::size_t n = 0; n < N; ++n) {
        const double shrink = state.delta_reg * state.mu * state.lambda[n];
        next.lambda[n] = std::max(state.lambda[n] + state.mu * (gp[n] - shrink), 0.0);
    }
    next.slot = state.slot + 1;
    return next;
}

double lambda_bound(double lambda0_max, double g_max, double mu, double delta_reg) {
    if (mu <= 0.0) return lambda0_max;
    return std::max(lambda0_max, g_max / (delta_reg * mu)) + 1e-9;
}

namespace {
std::size_t sample_from(const Vec& p, RngStream& rng) {
    const double u = rng.uniform01();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= 0.0) continue;
        acc += p[k];
        last = k;
        if (u < acc) return k;
    }
    return last;
}
}  // namespace

RunTrace run_exp3sp(env::ArmEnv& environment, const ArmSet& arms, Exp3Config cfg, long T,
                    RngStream rng) {
    if (T < 1) throw std::invalid_argument("run_exp3sp: horizon < 1");
    if (arms.size() != environment.n_arms())
        throw std::invalid_argument("run_exp3sp: arm set does not match environment");
    if (cfg.mu <= 0.0) cfg.mu = cfg.c_mu / std::sqrt(static_cast<double>(T));

    WeightState st = make_weight_state(arms.size(), environment.n_constraints(), cfg.mu,
                                       cfg.delta_reg);
    RunTrace trace;
    trace.algorithm = "exp3sp";
    trace.environment = "arms";
    trace.rows.reserve(static_cast<std::size_t>(T));
    for (long t = 0; t < T; ++t) {
        const std::vector<bool> mask = environment.next_mask();
        const Vec p = restrict_distribution(st, mask);
        const std::size_t k = sample_from(p, rng);
        const double f_val = environment.arm_loss(k);
        const Vec g_val = environment.arm_constraints(k);
        const Estimates est = importance_estimates(p, k, f_val, g_val);

        TraceRow row;
        row.slot = t;
        row.arm = static_cast<long>(k);
        row.decision = arms.arms[k];
        row.loss = f_val;
        row.constraint = g_val;
        row.multiplier = st.lambda;
        row.probs = p;
        row.rng_calls = rng.calls();
        trace.rows.push_back(std::move(row));

        st = exp3sp_step(st, p, est);
    }
    return trace;
}

}  // namespace fogopt::exp3
