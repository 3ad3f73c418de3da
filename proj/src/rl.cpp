#include "fogopt/rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fogopt::rl {

QTable QTable::zeros(std::size_t n_states, std::size_t n_actions, double init) {
    QTable t;
    t.q.assign(n_states, core::Vec(n_actions, init));
    t.visit_counts.assign(n_states, std::vector<long>(n_actions, 0));
    return t;
}

std::size_t QTable::greedy(std::size_t s, const std::vector<bool>& mask) const {
    std::size_t best = mask.size();
    double best_v = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < mask.size(); ++a) {
        if (!mask[a]) continue;
        if (q[s][a] < best_v) {
            best_v = q[s][a];
            best = a;
        }
    }
    if (best == mask.size()) throw std::invalid_argument("QTable::greedy: empty action mask");
    return best;
}

double QTable::min_over(std::size_t s, const std::vector<bool>& mask) const {
    return q[s][greedy(s, mask)];
}

double ExploreSchedule::eps_at(long t) const {
    return eps0 / (1.0 + static_cast<double>(t) / tau);
}

std::size_t act_eps_greedy(const QTable& table, std::size_t s, const std::vector<bool>& mask,
                           double eps, RngStream& rng) {
    std::size_t n_avail = 0;
    for (bool b : mask) n_avail += b;
    if (n_avail == 0) throw std::invalid_argument("act_eps_greedy: empty action mask");
    if (rng.uniform01() < eps) {
        std::size_t pick = rng.uniform_index(n_avail);
        for (std::size_t a = 0; a < mask.size(); ++a) {
            if (!mask[a]) continue;
            if (pick == 0) return a;
            --pick;
        }
    }
    return table.greedy(s, mask);
}

void q_update(QTable& table, std::size_t s, std::size_t a, double cost, std::size_t s_next,
              double gamma, const std::vector<bool>& mask_next) {
    const double alpha = 1.0 / static_cast<double>(++table.visit_counts[s][a]);
    const double target = cost + gamma * table.min_over(s_next, mask_next);
    table.q[s][a] += alpha * (target - table.q[s][a]);
}

QTable value_iteration(const FiniteMDP& mdp, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("value_iteration: tol must be positive");
    mdp.validate();
    const double gamma = mdp.discount;
    // stop when the sweep moves less than tol (1 - gamma) / gamma, which pins
    // the fixed-point error below tol
    const double stop = tol * (1.0 - gamma) / gamma;
    QTable table = QTable::zeros(mdp.n_states, mdp.n_actions);
    core::Vec v(mdp.n_states, 0.0);
    for (long sweep = 0; sweep < 100000000; ++sweep) {
        for (std::size_t s = 0; s < mdp.n_states; ++s) v[s] = table.min_over(s, mdp.available[s]);
        double change = 0.0;
        for (std::size_t s = 0; s < mdp.n_states; ++s)
            for (std::size_t a = 0; a < mdp.n_actions; ++a) {
                double ev = 0.0;
                const core::Vec& row = mdp.transition[a][s];
                for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) ev += row[s2] * v[s2];
                const double next = mdp.cost[s][a] + gamma * ev;
                change = std::max(change, std::abs(next - table.q[s][a]));
                table.q[s][a] = next;
            }
        if (change <= stop) break;
    }
    return table;
}

double bellman_residual(const FiniteMDP& mdp, const QTable& table) {
    core::Vec v(mdp.n_states);
    for (std::size_t s = 0; s < mdp.n_states; ++s) v[s] = table.min_over(s, mdp.available[s]);
    double res = 0.0;
    for (std::size_t s = 0; s < mdp.n_states; ++s)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) {
            double ev = 0.0;
            for (std::size_t s2 = 0; s2 < mdp.n_states; ++s2) ev += mdp.transition[a][s][s2] * v[s2];
            res = std::max(res, std::abs(table.q[s][a] - mdp.cost[s][a] - mdp.discount * ev));
        }
    return res;
}

RunTrace run_qlearning(const FiniteMDP& mdp, const ExploreSchedule& schedule, long T,
                       RngStream rng, QTable* out_table, const QTable* q_ref, double q_init) {
    if (T < 1) throw std::invalid_argument("run_qlearning: horizon < 1");
    mdp.validate();
    QTable table = QTable::zeros(mdp.n_states, mdp.n_actions, q_init);
    RunTrace trace;
    trace.algorithm = "qlearn";
    trace.environment = "mdp";
    trace.rows.reserve(static_cast<std::size_t>(T));
    std::size_t s = 0;
    for (long t = 0; t < T; ++t) {
        const double eps = schedule.eps_at(t);
        const std::size_t a = act_eps_greedy(table, s, mdp.available[s], eps, rng);
        const double cost = mdp.cost[s][a];
        const std::size_t s2 = mdp.sample_next(s, a, rng);
        q_update(table, s, a, cost, s2, mdp.discount, mdp.available[s2]);

        TraceRow row;
        row.slot = t;
        row.decision = {static_cast<double>(s), static_cast<double>(a)};
        row.loss = cost;
        if (q_ref) {
            double gap = 0.0;
            for (std::size_t ss = 0; ss < mdp.n_states; ++ss)
                for (std::size_t aa = 0; aa < mdp.n_actions; ++aa)
                    gap = std::max(gap, std::abs(table.q[ss][aa] - q_ref->q[ss][aa]));
            row.constraint = {gap};
        }
        row.rng_calls = rng.calls();
        trace.rows.push_back(std::move(row));
        s = s2;
    }
    if (out_table) *out_table = std::move(table);
    return trace;
}

}  // namespace fogopt::rl
