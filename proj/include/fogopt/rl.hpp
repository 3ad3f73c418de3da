#pragma once

#include <vector>

#include "fogopt/core.hpp"
#include "fogopt/env.hpp"
#include "fogopt/trace.hpp"

namespace fogopt::rl {

using core::RngStream;
using env::FiniteMDP;

struct QTable {
    std::vector<core::Vec> q;                     // q[s][a]
    std::vector<std::vector<long>> visit_counts;  // same shape

    static QTable zeros(std::size_t n_states, std::size_t n_actions, double init = 0.0);
    std::size_t n_states() const { return q.size(); }
    std::size_t n_actions() const { return q.empty() ? 0 : q[0].size(); }
    // argmin over available actions, ties broken by lowest index
    std::size_t greedy(std::size_t s, const std::vector<bool>& mask) const;
    double min_over(std::size_t s, const std::vector<bool>& mask) const;
};

struct ExploreSchedule {
    double eps0 = 1.0;   // in (0, 1]
    double tau = 5e4;    // decay timescale: eps_t = eps0 / (1 + t / tau)

    double eps_at(long t) const;
};

// Greedy with probability 1 - eps, uniform over the available actions with
// probability eps.
std::size_t act_eps_greedy(const QTable& table, std::size_t s, const std::vector<bool>& mask,
                           double eps, RngStream& rng);

// Temporal-difference update with stepsize 1 / visit_count(s, a); touches the
// single visited cell.
void q_update(QTable& table, std::size_t s, std::size_t a, double cost, std::size_t s_next,
              double gamma, const std::vector<bool>& mask_next);

// Bellman fixed point by successive approximation; returns Q with sup-norm
// error at most tol.
QTable value_iteration(const FiniteMDP& mdp, double tol);

// Largest |Q(s,x) - (f + gamma E min Q')| over all pairs.
double bellman_residual(const FiniteMDP& mdp, const QTable& table);

// Online Q-learning loop; the trace rows carry (state, action, cost) and the
// sup-norm gap to q_ref when one is supplied.
RunTrace run_qlearning(const FiniteMDP& mdp, const ExploreSchedule& schedule, long T,
                       RngStream rng, QTable* out_table = nullptr,
                       const QTable* q_ref = nullptr, double q_init = 0.0);

}  // namespace fogopt::rl
