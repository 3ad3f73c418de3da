#include "fogopt/dual.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fogopt::dual {

double QuadraticFamily::objective(const Vec& x) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) acc += quad[i] * x[i] * x[i] + lin[i] * x[i];
    return acc;
}

Vec QuadraticFamily::constraint(const Vec& x, const Vec& s) const {
    Vec g = a_mat.mul(x);
    if (s.size() != g.size()) throw std::invalid_argument("QuadraticFamily: state dim mismatch");
    for (std::size_t n = 0; n < g.size(); ++n) g[n] += s[n];
    return g;
}

void QuadraticFamily::validate() const {
    if (quad.size() != lin.size() || quad.size() != box.dim() || a_mat.cols != quad.size())
        throw std::invalid_argument("QuadraticFamily: dimension mismatch");
    for (double q : quad)
        if (q < 0.0)
            throw std::invalid_argument("QuadraticFamily: nonconvex subproblem requested");
}

double QuadraticFamily::dual_smoothness() const {
    double qmin = std::numeric_limits<double>::infinity();
    for (double q : quad) qmin = std::min(qmin, q);
    if (qmin <= 0.0) return std::numeric_limits<double>::infinity();
    double fro2 = 0.0;
    for (double v : a_mat.data) fro2 += v * v;
    return fro2 / (2.0 * qmin);
}

Vec lagrangian_argmin(const QuadraticFamily& fam, const Vec& s, const Vec& theta) {
    fam.validate();
    for (double th : theta)
        if (th < -1e-12) throw std::invalid_argument("lagrangian_argmin: negative price");
    (void)s;  // the state shifts g additively and does not move the minimizer
    const Vec atheta = fam.a_mat.tmul(theta);
    Vec x(fam.dim());
    for (std::size_t i = 0; i < fam.dim(); ++i) {
        const double slope = fam.lin[i] + atheta[i];
        double xi;
        if (fam.quad[i] > 0.0) {
            xi = -slope / (2.0 * fam.quad[i]);
        } else {
            // linear coordinate: minimizer sits on the cheaper bound
            xi = slope > 0.0 ? fam.box.lower[i] : fam.box.upper[i];
        }
        x[i] = std::min(std::max(xi, fam.box.lower[i]), fam.box.upper[i]);
    }
    return x;
}

Vec DualErm::sample_gradient(std::size_t n, const Vec& lambda) const {
    const Vec x = lagrangian_argmin(family, samples[n], lambda);
    return family.constraint(x, samples[n]);
}

double DualErm::value(const Vec& lambda) const {
    if (samples.empty()) throw std::invalid_argument("DualErm: empty sample set");
    double acc = 0.0;
    for (const auto& s : samples) {
        const Vec x = lagrangian_argmin(family, s, lambda);
        acc += family.objective(x) + core::dot(lambda, family.constraint(x, s));
    }
    return acc / static_cast<double>(samples.size()) - 0.5 * eps * core::dot(lambda, lambda);
}

double DualErm::condition_number() const {
    return (family.dual_smoothness() + eps) / eps;
}

std::vector<Vec> load_states(const std::string& path, std::size_t expected_dim) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read state file " + path);
    std::vector<Vec> out;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        Vec v;
        double x;
        while (ls >> x) v.push_back(x);
        if (v.empty()) continue;
        if (expected_dim != 0 && v.size() != expected_dim)
            throw std::runtime_error("state file row has dimension " + std::to_string(v.size()) +
                                     ", expected " + std::to_string(expected_dim));
        out.push_back(std::move(v));
    }
    return out;
}

Vec SagaMemory::running_avg() const {
    if (stored_grads.empty()) throw std::runtime_error("SagaMemory: empty table");
    return core::scale(grad_sum, 1.0 / static_cast<double>(stored_grads.size()));
}

SagaMemory init_memory(const DualErm& erm, const Vec& lambda0) {
    if (erm.samples.empty()) throw std::invalid_argument("init_memory: empty sample set");
    SagaMemory mem;
    mem.iterate = lambda0;
    mem.grad_sum.assign(erm.family.n_constraints(), 0.0);
    mem.stored_grads.reserve(erm.size());
    for (std::size_t n = 0; n < erm.size(); ++n) {
        Vec g = erm.sample_gradient(n, lambda0);
        core::axpy(mem.grad_sum, 1.0, g);
        mem.stored_grads.push_back(std::move(g));
    }
    return mem;
}

void saga_step(SagaMemory& mem, const DualErm& erm, double alpha, RngStream& rng) {
    if (mem.stored_grads.empty()) throw std::invalid_argument("saga_step: empty sample set");
    if (mem.stored_grads.size() != erm.size())
        throw std::invalid_argument("saga_step: memory does not match the sample set");
    const std::size_t nu = rng.uniform_index(erm.size());
    const Vec fresh = erm.sample_gradient(nu, mem.iterate);
    const double inv_n = 1.0 / static_cast<double>(erm.size());
    // aggregate term carries the regularizer: (1/N) sum stored - eps lambda
    Vec next(mem.iterate.size());
    for (std::size_t n = 0; n < next.size(); ++n) {
        const double aggregate = mem.grad_sum[n] * inv_n - erm.eps * mem.iterate[n];
        const double step = fresh[n] - mem.stored_grads[nu][n] + aggregate;
        next[n] = std::max(mem.iterate[n] + alpha * step, 0.0);
    }
    // refresh the drawn slot even when alpha = 0
    core::axpy(mem.grad_sum, -1.0, mem.stored_grads[nu]);
    core::axpy(mem.grad_sum, 1.0, fresh);
    mem.stored_grads[nu] = fresh;
    mem.iterate = std::move(next);
}

Vec online_saga_slot(SagaMemory& mem, DualErm& erm, const Vec& s_t, int k_steps, double alpha,
                     RngStream& rng) {
    if (k_steps < 1) throw std::invalid_argument("online_saga_slot: K must be >= 1");
    erm.samples.push_back(s_t);
    Vec g = erm.sample_gradient(erm.size() - 1, mem.iterate);
    core::axpy(mem.grad_sum, 1.0, g);
    mem.stored_grads.push_back(std::move(g));
    for (int k = 0; k < k_steps; ++k) saga_step(mem, erm, alpha, rng);
    return mem.iterate;
}

Vec effective_multiplier(const LearnAdaptState& st, const Vec& queues) {
    if (queues.size() != st.lambda.size() || st.bias.size() != st.lambda.size())
        throw std::invalid_argument("effective_multiplier: dimension mismatch");
    Vec theta(st.lambda.size());
    for (std::size_t n = 0; n < theta.size(); ++n)
        theta[n] = std::max(st.lambda[n] + st.mu * queues[n] - st.bias[n], 0.0);
    return theta;
}

Vec la_saga_slot(LearnAdaptState& st, SagaMemory& mem, DualErm& erm, env::QueueNetwork& net,
                 const Vec& c_t, const LearnAdaptConfig& cfg, RngStream& rng) {
    const double alpha = cfg.alpha > 0.0 ? cfg.alpha : default_saga_alpha(erm);
    st.lambda = online_saga_slot(mem, erm, c_t, cfg.k_steps, alpha, rng);
    const Vec theta = effective_multiplier(st, net.queues().q);
    Vec x = lagrangian_argmin(erm.family, c_t, theta);
    env::queue_step(net, x, c_t);
    return x;
}

void SgdDualBaseline::step(const Vec& s_t, double alpha_t) {
    if (!erm) throw std::runtime_error("SgdDualBaseline: no problem attached");
    const Vec x = lagrangian_argmin(erm->family, s_t, lambda);
    const Vec g = erm->family.constraint(x, s_t);
    for (std::size_t n = 0; n < lambda.size(); ++n)
        lambda[n] = std::max(lambda[n] + alpha_t * (g[n] - erm->eps * lambda[n]), 0.0);
}

double default_saga_alpha(const DualErm& erm) {
    const double l_smooth = erm.family.dual_smoothness() + erm.eps;
    return 1.0 / (2.0 * (erm.eps * static_cast<double>(erm.size()) + l_smooth));
}

Vec solve_erm_optimum(const DualErm& erm, double tol, long max_iters) {
    if (erm.samples.empty()) throw std::invalid_argument("solve_erm_optimum: empty sample set");
    const double l_smooth = erm.family.dual_smoothness() + erm.eps;
    const double step = 1.0 / l_smooth;
    // a projected-gradient move of m implies an error of at most m * L / eps,
    // so stop only once the movement is small enough to certify tol; the floor
    // keeps weakly regularized problems from spinning at machine precision
    const double stop = std::max(tol * erm.eps / l_smooth, 1e-15);
    Vec lambda(erm.family.n_constraints(), 0.0);
    for (long it = 0; it < max_iters; ++it) {
        Vec grad(lambda.size(), 0.0);
        for (std::size_t n = 0; n < erm.size(); ++n)
            core::axpy(grad, 1.0 / static_cast<double>(erm.size()), erm.sample_gradient(n, lambda));
        core::axpy(grad, -erm.eps, lambda);
        double move = 0.0;
        for (std::size_t n = 0; n < lambda.size(); ++n) {
            const double next = std::max(lambda[n] + step * grad[n], 0.0);
            move = std::max(move, std::abs(next - lambda[n]));
            lambda[n] = next;
        }
        if (move < stop) break;
    }
    return lambda;
}

}  // namespace fogopt::dual
