#include "fogopt/saddle.hpp"

#include <algorithm>
#include <cmath>

namespace fogopt::saddle {

void SaddleConfig::validate_bandit(const BoxSet& box) const {
    const double r = box.inradius();
    if (delta <= 0.0) throw std::invalid_argument("SaddleConfig: delta must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("SaddleConfig: gamma outside [0,1)");
    if (delta > gamma * r + 1e-12)
        throw std::invalid_argument("SaddleConfig: need delta <= gamma * inradius");
    if (m_evals >= 2 && m_evals % 2 != 0)
        throw std::invalid_argument("SaddleConfig: M must be even for paired evaluations");
}

SaddleConfig resolve_for_horizon(SaddleConfig cfg, long T, FeedbackMode mode, const BoxSet& box) {
    if (T < 1) throw std::invalid_argument("resolve_for_horizon: horizon < 1");
    const double t = static_cast<double>(T);
    switch (mode) {
        case FeedbackMode::FullInfo:
            if (cfg.alpha <= 0.0) cfg.alpha = cfg.c_alpha / std::sqrt(t);
            if (cfg.mu <= 0.0) cfg.mu = cfg.c_mu / std::sqrt(t);
            break;
        case FeedbackMode::OnePoint:
            if (cfg.alpha <= 0.0) cfg.alpha = cfg.c_alpha / std::pow(t, 0.75);
            if (cfg.mu <= 0.0) cfg.mu = cfg.c_mu / std::sqrt(t);
            if (cfg.delta <= 0.0) cfg.delta = cfg.c_delta / std::pow(t, 0.25);
            break;
        case FeedbackMode::MultiPoint:
            if (cfg.alpha <= 0.0) cfg.alpha = cfg.c_alpha / std::sqrt(t);
            if (cfg.mu <= 0.0) cfg.mu = cfg.c_mu / std::sqrt(t);
            if (cfg.delta <= 0.0) cfg.delta = cfg.c_delta / std::pow(t, 0.25);
            break;
        case FeedbackMode::ArmValue:
            throw std::invalid_argument("resolve_for_horizon: arm-value feedback is not a saddle mode");
    }
    if (mode != FeedbackMode::FullInfo) {
        const double r = box.inradius();
        cfg.delta = std::min(cfg.delta, 0.5 * r);  // keep the shrunk set nondegenerate
        if (cfg.gamma <= 0.0) cfg.gamma = cfg.delta / r;
        cfg.validate_bandit(box);
    }
    return cfg;
}

AlgoState make_state(const Vec& x0, std::size_t n_constraints) {
    AlgoState st;
    st.x_hat = x0;
    st.lambda.assign(n_constraints, 0.0);
    st.grad_accum.assign(x0.size(), 0.0);
    return st;
}

namespace {

// x_next = P_set(x - step o grad), with per-entry steps when adaptive.
Vec primal_update(const AlgoState& st, const Vec& grad_lagr, const SaddleConfig& cfg,
                  const BoxSet& set, Vec* accum_out) {
    Vec x = st.x_hat;
    if (cfg.adaptive) {
        Vec accum = st.grad_accum;
        for (std::size_t i = 0; i < x.size(); ++i) {
            accum[i] += grad_lagr[i] * grad_lagr[i];
            x[i] -= cfg.alpha / std::sqrt(cfg.eps0 + accum[i]) * grad_lagr[i];
        }
        if (accum_out) *accum_out = std::move(accum);
    } else {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= cfg.alpha * grad_lagr[i];
        if (accum_out) *accum_out = st.grad_accum;
    }
    return core::project_box(x, set);
}

// lambda_next = [lambda + mu (g + J (x_next - x))]^+
Multiplier dual_update(const Multiplier& lambda, const Vec& g, const core::Mat& jac,
                       const Vec& x_next, const Vec& x, double mu) {
    Vec dx = core::sub(x_next, x);
    Vec pred = jac.mul(dx);
    Multiplier out(lambda.size());
    for (std::size_t n = 0; n < lambda.size(); ++n)
        out[n] = std::max(lambda[n] + mu * (g[n] + pred[n]), 0.0);
    return out;
}

}  // namespace

AlgoState mosp_step(const AlgoState& state, SlotFunctions& slot_fns, const SaddleConfig& cfg,
                    const BoxSet& set) {
    if (slot_fns.mode() != FeedbackMode::FullInfo)
        throw std::runtime_error("mosp_step: requires full-information feedback");
    const Vec grad_f = slot_fns.loss_gradient(state.x_hat);
    const core::Mat jac = slot_fns.constraint_jacobian(state.x_hat);
    Vec grad_lagr = grad_f;
    core::axpy(grad_lagr, 1.0, jac.tmul(state.lambda));

    AlgoState next = state;
    next.x_hat = primal_update(state, grad_lagr, cfg, set, &next.grad_accum);
    const Vec g = slot_fns.constraints(state.x_hat);
    next.lambda = dual_update(state.lambda, g, jac, next.x_hat, state.x_hat, cfg.mu);
    next.slot = state.slot + 1;
    return next;
}

GradientEstimate one_point_gradient(SlotFunctions& slot_fns, const Vec& x_hat, double delta,
                                    RngStream& rng) {
    const std::size_t d = x_hat.size();
    Vec u = core::sample_unit_sphere(d, rng);
    Vec point = x_hat;
    core::axpy(point, delta, u);
    const double val = slot_fns.eval_loss(point);
    GradientEstimate est;
    est.grad = core::scale(u, static_cast<double>(d) / delta * val);
    est.eval_points.push_back(std::move(point));
    est.mean_loss = val;
    return est;
}

GradientEstimate multi_point_gradient(SlotFunctions& slot_fns, const Vec& x_hat, double delta,
                                      int m_evals, RngStream& rng) {
    if (m_evals < 2 || m_evals % 2 != 0)
        throw std::invalid_argument("multi_point_gradient: M must be even and >= 2");
    const std::size_t d = x_hat.size();
    const int pairs = m_evals / 2;
    GradientEstimate est;
    est.grad.assign(d, 0.0);
    double loss_sum = 0.0;
    for (int p = 0; p < pairs; ++p) {
        Vec u = core::sample_unit_sphere(d, rng);
        Vec xp = x_hat;
        core::axpy(xp, delta, u);
        Vec xm = x_hat;
        core::axpy(xm, -delta, u);
        const double fp = slot_fns.eval_loss(xp);
        const double fm = slot_fns.eval_loss(xm);
        loss_sum += fp + fm;
        core::axpy(est.grad, static_cast<double>(d) / (2.0 * delta) * (fp - fm), u);
        est.eval_points.push_back(std::move(xp));
        est.eval_points.push_back(std::move(xm));
    }
    est.grad = core::scale(est.grad, 1.0 / pairs);
    est.mean_loss = loss_sum / m_evals;
    return est;
}

AlgoState bansp_step(const AlgoState& state, SlotFunctions& slot_fns, const Vec& grad_estimate,
                     const SaddleConfig& cfg, const ShrunkSet& shrunk) {
    const BoxSet inner = shrunk.box();
    if (!inner.contains(state.x_hat, 1e-9))
        throw std::runtime_error("bansp_step: center point left the shrunk set");
    const core::Mat jac = slot_fns.constraint_jacobian(state.x_hat);
    Vec grad_lagr = grad_estimate;
    core::axpy(grad_lagr, 1.0, jac.tmul(state.lambda));

    AlgoState next = state;
    next.x_hat = primal_update(state, grad_lagr, cfg, inner, &next.grad_accum);
    const Vec g = slot_fns.constraints(state.x_hat);
    next.lambda = dual_update(state.lambda, g, jac, next.x_hat, state.x_hat, cfg.mu);
    next.slot = state.slot + 1;
    return next;
}

std::string to_string(SaddleAlgo a) {
    switch (a) {
        case SaddleAlgo::Mosp: return "mosp";
        case SaddleAlgo::BanspOnePoint: return "bansp1";
        case SaddleAlgo::BanspMultiPoint: return "banspM";
    }
    return "?";
}

FeedbackMode required_feedback(SaddleAlgo a) {
    switch (a) {
        case SaddleAlgo::Mosp: return FeedbackMode::FullInfo;
        case SaddleAlgo::BanspOnePoint: return FeedbackMode::OnePoint;
        case SaddleAlgo::BanspMultiPoint: return FeedbackMode::MultiPoint;
    }
    return FeedbackMode::FullInfo;
}

RunTrace run_saddle(env::FogOcoEnv& environment, SaddleAlgo algo, SaddleConfig cfg, long T,
                    RngStream perturb_rng) {
    if (T < 1) throw std::invalid_argument("run_saddle: horizon < 1");
    if (environment.mode() != required_feedback(algo))
        throw std::invalid_argument("run_saddle: environment feedback mode does not match " +
                                    to_string(algo));
    const BoxSet& box = environment.box();
    cfg = resolve_for_horizon(cfg, T, environment.mode(), box);

    RunTrace trace;
    trace.algorithm = to_string(algo);
    trace.environment = "fog";

    const bool bandit = algo != SaddleAlgo::Mosp;
    ShrunkSet shrunk;
    if (bandit) shrunk = core::shrink_box(box, cfg.gamma);
    AlgoState st = make_state(box.center(), environment.n_constraints());

    trace.rows.reserve(static_cast<std::size_t>(T));
    for (long t = 0; t < T; ++t) {
        SlotFunctions slot = environment.next();
        TraceRow row;
        row.slot = t;
        if (algo == SaddleAlgo::Mosp) {
            row.decision = st.x_hat;
            row.loss = slot.eval_loss(st.x_hat);
            row.constraint = slot.constraints(st.x_hat);
            row.multiplier = st.lambda;
            st = mosp_step(st, slot, cfg, box);
        } else {
            GradientEstimate est;
            if (algo == SaddleAlgo::BanspOnePoint) {
                est = one_point_gradient(slot, st.x_hat, cfg.delta, perturb_rng);
                row.decision = est.eval_points.front();
            } else {
                est = multi_point_gradient(slot, st.x_hat, cfg.delta, cfg.m_evals, perturb_rng);
                row.decision = st.x_hat;
            }
            for (const auto& p : est.eval_points)
                if (!box.contains(p, 1e-9))
                    throw std::runtime_error("run_saddle: played point left the feasible box");
            row.loss = est.mean_loss;
            row.constraint = slot.constraints(row.decision);
            row.multiplier = st.lambda;
            st = bansp_step(st, slot, est.grad, cfg, shrunk);
        }
        row.rng_calls = perturb_rng.calls();
        trace.rows.push_back(std::move(row));
    }
    return trace;
}

}  // namespace fogopt::saddle
