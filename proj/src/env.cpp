#include "fogopt/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fogopt::env {

std::string to_string(FeedbackMode m) {
    switch (m) {
        case FeedbackMode::FullInfo: return "full-info";
        case FeedbackMode::OnePoint: return "one-point";
        case FeedbackMode::MultiPoint: return "multi-point";
        case FeedbackMode::ArmValue: return "arm-value";
    }
    return "?";
}

SlotFunctions::SlotFunctions(FeedbackMode mode, int eval_budget,
                             std::function<double(const Vec&)> loss,
                             std::function<Vec(const Vec&)> loss_grad,
                             std::function<Vec(const Vec&)> constraints,
                             std::function<Mat(const Vec&)> constraint_jac)
    : mode_(mode),
      eval_budget_(eval_budget),
      loss_(std::move(loss)),
      loss_grad_(std::move(loss_grad)),
      constraints_(std::move(constraints)),
      constraint_jac_(std::move(constraint_jac)) {
    if (eval_budget_ < 0) {
        switch (mode_) {
            case FeedbackMode::FullInfo: eval_budget_ = std::numeric_limits<int>::max(); break;
            case FeedbackMode::OnePoint: eval_budget_ = 1; break;
            case FeedbackMode::MultiPoint: eval_budget_ = 2; break;
            case FeedbackMode::ArmValue: eval_budget_ = 1; break;
        }
    }
}

double SlotFunctions::eval_loss(const Vec& x) {
    if (evals_used_ >= eval_budget_)
        throw std::runtime_error("SlotFunctions: feedback budget exceeded (" +
                                 std::to_string(eval_budget_) + " evals in " + to_string(mode_) +
                                 " mode)");
    ++evals_used_;
    return loss_(x);
}

Vec SlotFunctions::loss_gradient(const Vec& x) const {
    if (mode_ != FeedbackMode::FullInfo)
        throw std::runtime_error("SlotFunctions: loss gradient unavailable in " + to_string(mode_) +
                                 " mode");
    if (!loss_grad_) throw std::runtime_error("SlotFunctions: no gradient evaluator");
    return loss_grad_(x);
}

Vec SlotFunctions::constraints(const Vec& x) const { return constraints_(x); }

Mat SlotFunctions::constraint_jacobian(const Vec& x) const { return constraint_jac_(x); }

Vec SlotFunctions::oracle_loss_gradient(const Vec& x) const {
    if (!loss_grad_) throw std::runtime_error("SlotFunctions: no gradient evaluator");
    return loss_grad_(x);
}

// ---------------------------------------------------------------------------

DemandKind demand_kind_from_string(const std::string& s) {
    if (s == "iid-uniform") return DemandKind::IidUniform;
    if (s == "markov-ar1") return DemandKind::MarkovAr1;
    if (s == "adversarial-switch") return DemandKind::AdversarialSwitch;
    if (s == "adversarial-ramp") return DemandKind::AdversarialRamp;
    throw std::invalid_argument("unknown demand kind: " + s);
}

std::string to_string(DemandKind k) {
    switch (k) {
        case DemandKind::IidUniform: return "iid-uniform";
        case DemandKind::MarkovAr1: return "markov-ar1";
        case DemandKind::AdversarialSwitch: return "adversarial-switch";
        case DemandKind::AdversarialRamp: return "adversarial-ramp";
    }
    return "?";
}

DemandProcess::DemandProcess(std::size_t dim, DemandParams params, RngStream rng)
    : params_(params), rng_(rng), state_(dim, 0.0) {
    if (params_.lo < 0.0 || params_.hi < params_.lo)
        throw std::invalid_argument("DemandProcess: need 0 <= lo <= hi");
    if (params_.kind == DemandKind::MarkovAr1 && !(params_.rho >= 0.0 && params_.rho < 1.0))
        throw std::invalid_argument("DemandProcess: AR coefficient must be in [0,1)");
    if (params_.d_max < 0.0) params_.d_max = params_.hi;
    for (auto& v : state_) v = rng_.uniform(params_.lo, params_.hi);
    if (params_.kind == DemandKind::AdversarialSwitch || params_.kind == DemandKind::AdversarialRamp)
        slot_ = static_cast<long>(rng_.uniform_index(2 * static_cast<std::size_t>(
                                      std::max(params_.period, 1))));
}

Vec DemandProcess::next() {
    switch (params_.kind) {
        case DemandKind::IidUniform:
            for (auto& v : state_) v = rng_.uniform(params_.lo, params_.hi);
            break;
        case DemandKind::MarkovAr1:
            for (auto& v : state_) {
                const double xi = rng_.uniform(params_.lo, params_.hi);
                v = params_.rho * v + (1.0 - params_.rho) * xi;
            }
            break;
        case DemandKind::AdversarialSwitch: {
            const long p = std::max(params_.period, 1);
            const bool high = (slot_ / p) % 2 == 1;
            std::fill(state_.begin(), state_.end(), high ? params_.hi : params_.lo);
            break;
        }
        case DemandKind::AdversarialRamp: {
            // triangle wave between lo and hi with the given per-slot slope
            const double span = std::max(params_.hi - params_.lo, 1e-12);
            const double phase = std::fmod(static_cast<double>(slot_) * params_.slope, 2.0 * span);
            const double tri = phase <= span ? phase : 2.0 * span - phase;
            std::fill(state_.begin(), state_.end(), params_.lo + tri);
            break;
        }
    }
    ++slot_;
    Vec out(state_.size());
    for (std::size_t i = 0; i < state_.size(); ++i)
        out[i] = std::min(std::max(state_[i], 0.0), params_.d_max);
    return out;
}

// ---------------------------------------------------------------------------

Mat FogNetwork::balance_jacobian() const {
    Mat jac(n_nodes, dim());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        jac(static_cast<std::size_t>(edges[e].first), e) = -1.0;   // outgoing
        jac(static_cast<std::size_t>(edges[e].second), e) = +1.0;  // incoming
    }
    for (std::size_t n = 0; n < n_nodes; ++n) {
        jac(n, cloud_offset() + n) = -1.0;
        jac(n, local_offset() + n) = -1.0;
    }
    return jac;
}

void FogNetwork::validate() const {
    if (n_nodes == 0) throw std::invalid_argument("FogNetwork: need at least one node");
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_nodes ||
            static_cast<std::size_t>(v) >= n_nodes || u == v)
            throw std::invalid_argument("FogNetwork: bad edge");
    }
    if (caps.dim() != dim()) throw std::invalid_argument("FogNetwork: caps dimension mismatch");
    for (std::size_t i = 0; i < caps.dim(); ++i)
        if (caps.lower[i] < 0.0) throw std::invalid_argument("FogNetwork: caps must be nonnegative");
    if (delay_quad.size() != dim() || delay_lin.size() != dim())
        throw std::invalid_argument("FogNetwork: delay coefficient dimension mismatch");
    for (double a : delay_quad)
        if (a < 0.0) throw std::invalid_argument("FogNetwork: quadratic coefficients must be >= 0");
    if (jitter < 0.0 || jitter >= 1.0) throw std::invalid_argument("FogNetwork: jitter outside [0,1)");
}

FogNetwork make_line_fog(std::size_t n_nodes, double edge_cap, double cloud_cap, double local_cap,
                         Vec delay_quad, Vec delay_lin, double jitter) {
    FogNetwork net;
    net.n_nodes = n_nodes;
    for (std::size_t n = 0; n + 1 < n_nodes; ++n)
        net.edges.emplace_back(static_cast<int>(n), static_cast<int>(n + 1));
    const std::size_t d = net.dim();
    Vec hi(d, 0.0);
    for (std::size_t e = 0; e < net.edges.size(); ++e) hi[e] = edge_cap;
    for (std::size_t n = 0; n < n_nodes; ++n) {
        hi[net.cloud_offset() + n] = cloud_cap;
        hi[net.local_offset() + n] = local_cap;
    }
    net.caps = BoxSet(Vec(d, 0.0), hi);
    net.delay_quad = std::move(delay_quad);
    net.delay_lin = std::move(delay_lin);
    if (net.delay_quad.size() == 1) net.delay_quad.assign(d, net.delay_quad[0]);
    if (net.delay_lin.size() == 1) net.delay_lin.assign(d, net.delay_lin[0]);
    net.jitter = jitter;
    net.validate();
    return net;
}

SlotFunctions fog_slot_with_multipliers(const FogNetwork& net, const Vec& demands,
                                        const Vec& coeff_mult, FeedbackMode mode,
                                        int eval_budget) {
    if (demands.size() != net.n_nodes)
        throw std::invalid_argument("fog_slot: demand dimension mismatch");
    for (double d : demands)
        if (d < 0.0) throw std::invalid_argument("fog_slot: negative demand");
    if (coeff_mult.size() != net.dim())
        throw std::invalid_argument("fog_slot: multiplier dimension mismatch");

    Vec quad(net.dim()), lin(net.dim());
    for (std::size_t i = 0; i < net.dim(); ++i) {
        quad[i] = net.delay_quad[i] * coeff_mult[i];
        lin[i] = net.delay_lin[i] * coeff_mult[i];
    }
    const std::size_t d = net.dim();
    Mat jac = net.balance_jacobian();
    Vec dem = demands;

    auto loss = [quad, lin, d](const Vec& x) {
        if (x.size() != d) throw std::invalid_argument("fog loss: dimension mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < d; ++i) acc += quad[i] * x[i] * x[i] + lin[i] * x[i];
        return acc;
    };
    auto grad = [quad, lin, d](const Vec& x) {
        if (x.size() != d) throw std::invalid_argument("fog grad: dimension mismatch");
        Vec g(d);
        for (std::size_t i = 0; i < d; ++i) g[i] = 2.0 * quad[i] * x[i] + lin[i];
        return g;
    };
    auto cons = [jac, dem](const Vec& x) {
        Vec g = jac.mul(x);
        for (std::size_t n = 0; n < dem.size(); ++n) g[n] += dem[n];
        return g;
    };
    auto cons_jac = [jac](const Vec&) { return jac; };
    SlotFunctions slot(mode, eval_budget, loss, grad, cons, cons_jac);
    slot.set_quadratic_form({quad, lin});
    return slot;
}

SlotFunctions fog_slot(const FogNetwork& net, const Vec& demands, RngStream& coeff_draw,
                       FeedbackMode mode, int eval_budget) {
    Vec mult(net.dim());
    for (auto& m : mult) m = coeff_draw.uniform(1.0 - net.jitter, 1.0 + net.jitter);
    return fog_slot_with_multipliers(net, demands, mult, mode, eval_budget);
}

namespace {
constexpr std::uint64_t kStreamDemand = 1;
constexpr std::uint64_t kStreamJitter = 2;
constexpr std::uint64_t kStreamAvailability = 3;
}  // namespace

FogOcoEnv::FogOcoEnv(FogNetwork net, DemandParams demand_params, FeedbackMode mode,
                     std::uint64_t seed, int eval_budget)
    : net_(std::move(net)),
      mode_(mode),
      eval_budget_(eval_budget),
      demands_(net_.n_nodes, demand_params, RngStream(seed, kStreamDemand)),
      jitter_(net_.dim(),
              [&] {
                  DemandParams p = demand_params;  // same regime drives the jitter
                  p.lo = 1.0 - net_.jitter;
                  p.hi = 1.0 + net_.jitter;
                  p.d_max = p.hi;
                  return p;
              }(),
              RngStream(seed, kStreamJitter)) {
    net_.validate();
}

SlotFunctions FogOcoEnv::next() {
    Vec d = demands_.next();
    Vec m = jitter_.next();
    return fog_slot_with_multipliers(net_, d, m, mode_, eval_budget_);
}

// ---------------------------------------------------------------------------

QueueNetwork::QueueNetwork(std::size_t n_nodes, std::vector<std::pair<int, int>> edges,
                           Vec service, DemandParams arrival_params, std::uint64_t seed)
    : n_nodes_(n_nodes),
      edges_(std::move(edges)),
      incidence_(n_nodes, edges_.size()),
      service_(std::move(service)),
      arrivals_(n_nodes, arrival_params, RngStream(seed, kStreamDemand)),
      arrival_params_(arrival_params) {
    if (service_.size() != n_nodes_) throw std::invalid_argument("QueueNetwork: service size");
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto [u, v] = edges_[e];
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_nodes_ ||
            static_cast<std::size_t>(v) >= n_nodes_ || u == v)
            throw std::invalid_argument("QueueNetwork: bad edge");
        incidence_(static_cast<std::size_t>(u), e) = -1.0;
        incidence_(static_cast<std::size_t>(v), e) = +1.0;
    }
    queues_.q.assign(n_nodes_, 0.0);
}

Vec QueueNetwork::next_exogenous() {
    Vec c = arrivals_.next();
    for (std::size_t n = 0; n < n_nodes_; ++n) c[n] -= service_[n];
    return c;
}

Vec QueueNetwork::mean_exogenous() const {
    const double mean = 0.5 * (arrival_params_.lo + arrival_params_.hi);
    Vec c(n_nodes_, mean);
    for (std::size_t n = 0; n < n_nodes_; ++n) c[n] -= service_[n];
    return c;
}

void QueueNetwork::reset_queues() { queues_.q.assign(n_nodes_, 0.0); }

QueueState& queue_step(QueueNetwork& net, const Vec& x, const Vec& c) {
    if (x.size() != net.n_edges() || c.size() != net.n_nodes())
        throw std::invalid_argument("queue_step: dimension mismatch");
    Vec flow = net.incidence_.mul(x);
    for (std::size_t n = 0; n < net.n_nodes_; ++n)
        net.queues_.q[n] = std::max(net.queues_.q[n] + flow[n] + c[n], 0.0);
    return net.queues_;
}

// ---------------------------------------------------------------------------

void FiniteMDP::validate() const {
    if (n_states == 0 || n_actions == 0) throw std::invalid_argument("FiniteMDP: empty spaces");
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("FiniteMDP: discount outside (0,1)");
    for (std::size_t a = 0; a < n_actions; ++a)
        for (std::size_t s = 0; s < n_states; ++s) {
            double sum = 0.0;
            for (double p : transition[a][s]) {
                if (p < 0.0) throw std::invalid_argument("FiniteMDP: negative probability");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("FiniteMDP: transition row does not sum to 1");
        }
    for (std::size_t s = 0; s < n_states; ++s) {
        bool any = false;
        for (std::size_t a = 0; a < n_actions; ++a) {
            if (available[s][a]) any = true;
            if (!std::isfinite(cost[s][a])) throw std::invalid_argument("FiniteMDP: bad cost");
        }
        if (!any) throw std::invalid_argument("FiniteMDP: state without available action");
    }
}

std::size_t FiniteMDP::sample_next(std::size_t s, std::size_t a, RngStream& rng) const {
    const Vec& row = transition[a][s];
    double u = rng.uniform01();
    double acc = 0.0;
    for (std::size_t s2 = 0; s2 + 1 < row.size(); ++s2) {
        acc += row[s2];
        if (u < acc) return s2;
    }
    return row.size() - 1;
}

FiniteMDP random_mdp(std::size_t n_states, std::size_t n_actions, double discount,
                     RngStream& rng) {
    if (n_states < 1 || n_actions < 1) throw std::invalid_argument("random_mdp: sizes must be >= 1");
    if (!(discount > 0.0 && discount < 1.0))
        throw std::invalid_argument("random_mdp: discount outside (0,1)");
    FiniteMDP mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.discount = discount;
    mdp.transition.assign(n_actions, std::vector<Vec>(n_states, Vec(n_states, 0.0)));
    mdp.cost.assign(n_states, Vec(n_actions, 0.0));
    mdp.available.assign(n_states, std::vector<bool>(n_actions, true));
    for (std::size_t a = 0; a < n_actions; ++a)
        for (std::size_t s = 0; s < n_states; ++s) {
            double sum = 0.0;
            for (std::size_t s2 = 0; s2 < n_states; ++s2) {
                // positive draws normalized; flat Dirichlet-style rows
                const double w = -std::log(std::max(rng.uniform01(), 1e-300));
                mdp.transition[a][s][s2] = w;
                sum += w;
            }
            for (std::size_t s2 = 0; s2 < n_states; ++s2) mdp.transition[a][s][s2] /= sum;
        }
    for (std::size_t s = 0; s < n_states; ++s)
        for (std::size_t a = 0; a < n_actions; ++a) mdp.cost[s][a] = rng.uniform01();
    mdp.validate();
    return mdp;
}

// ---------------------------------------------------------------------------

std::vector<Vec> discretize_box(const BoxSet& box, std::size_t per_dim, std::size_t max_arms) {
    if (per_dim < 1) throw std::invalid_argument("discretize_box: per_dim must be >= 1");
    std::vector<Vec> arms;
    Vec idx(box.dim(), 0.0);
    std::vector<std::size_t> counter(box.dim(), 0);
    while (arms.size() < max_arms) {
        Vec x(box.dim());
        for (std::size_t i = 0; i < box.dim(); ++i) {
            const double frac = per_dim == 1 ? 0.5 : static_cast<double>(counter[i]) / (per_dim - 1);
            x[i] = box.lower[i] + frac * (box.upper[i] - box.lower[i]);
        }
        arms.push_back(std::move(x));
        std::size_t i = 0;
        for (; i < box.dim(); ++i) {
            if (++counter[i] < per_dim) break;
            counter[i] = 0;
        }
        if (i == box.dim()) break;
    }
    return arms;
}

ArmEnv::ArmEnv(std::vector<Vec> arms, Vec arm_loss, Mat arm_constraints, ArmAvailability avail,
               std::uint64_t seed)
    : arms_(std::move(arms)),
      n_constraints_(arm_constraints.rows),
      avail_(avail),
      avail_rng_(seed, kStreamAvailability),
      stationary_(true),
      loss_table_(std::move(arm_loss)),
      constraint_table_(std::move(arm_constraints)) {
    if (arms_.empty()) throw std::invalid_argument("ArmEnv: need at least one arm");
    if (loss_table_.size() != arms_.size() || constraint_table_.cols != arms_.size())
        throw std::invalid_argument("ArmEnv: table dimension mismatch");
    cur_loss_ = loss_table_;
    cur_constraints_ = constraint_table_;
}

ArmEnv::ArmEnv(FogNetwork net, std::size_t grid_per_dim, double deadline,
               DemandParams demand_params, ArmAvailability avail, std::uint64_t seed)
    : avail_(avail),
      avail_rng_(seed, kStreamAvailability),
      stationary_(false),
      net_(std::move(net)),
      deadline_(deadline) {
    net_->validate();
    arms_ = discretize_box(net_->caps, grid_per_dim, 4096);
    n_constraints_ = net_->n_nodes;
    demands_.emplace(net_->n_nodes, demand_params, RngStream(seed, kStreamDemand));
    DemandParams jp = demand_params;
    jp.lo = 1.0 - net_->jitter;
    jp.hi = 1.0 + net_->jitter;
    jp.d_max = jp.hi;
    jitter_.emplace(net_->dim(), jp, RngStream(seed, kStreamJitter));
}

double ArmEnv::g_max() const {
    double m = 0.0;
    const Mat& table = stationary_ ? constraint_table_ : cur_constraints_;
    for (double v : table.data) m = std::max(m, std::abs(v));
    return m;
}

void ArmEnv::roll_slot_costs() {
    if (stationary_) return;
    Vec dem = demands_->next();
    Vec mult = jitter_->next();
    auto slot = fog_slot_with_multipliers(*net_, dem, mult, FeedbackMode::FullInfo);
    cur_loss_.assign(arms_.size(), 0.0);
    cur_constraints_ = Mat(n_constraints_, arms_.size());
    const std::size_t n_edges = net_->edges.size();
    for (std::size_t k = 0; k < arms_.size(); ++k) {
        const Vec& x = arms_[k];
        // per-node delay: cloud + outgoing-edge + local terms
        Vec delay(net_->n_nodes, 0.0);
        for (std::size_t e = 0; e < n_edges; ++e) {
            const auto from = static_cast<std::size_t>(net_->edges[e].first);
            delay[from] += net_->delay_quad[e] * x[e] * x[e] + net_->delay_lin[e] * x[e];
        }
        for (std::size_t n = 0; n < net_->n_nodes; ++n) {
            const std::size_t ci = net_->cloud_offset() + n;
            const std::size_t li = net_->local_offset() + n;
            delay[n] += net_->delay_quad[ci] * x[ci] * x[ci] + net_->delay_lin[ci] * x[ci];
            delay[n] += net_->delay_quad[li] * x[li] * x[li] + net_->delay_lin[li] * x[li];
        }
        double misses = 0.0;
        for (std::size_t n = 0; n < net_->n_nodes; ++n)
            if (delay[n] > deadline_) misses += 1.0;
        cur_loss_[k] = misses;
        Vec g = slot.constraints(x);
        for (std::size_t n = 0; n < n_constraints_; ++n) cur_constraints_(n, k) = g[n];
    }
}

std::vector<bool> ArmEnv::next_mask() {
    ++slot_;
    roll_slot_costs();
    std::vector<bool> mask(arms_.size(), true);
    switch (avail_.kind) {
        case AvailabilityKind::Always: break;
        case AvailabilityKind::IidBernoulli: {
            bool any = false;
            do {
                any = false;
                for (std::size_t k = 0; k < mask.size(); ++k) {
                    mask[k] = avail_rng_.bernoulli(avail_.rate);
                    any = any || mask[k];
                }
            } while (!any);  // resample until nonempty
            break;
        }
        case AvailabilityKind::PeriodicBlocking: {
            if (arms_.size() > 1) {
                const long p = std::max(avail_.period, 1);
                const std::size_t blocked =
                    static_cast<std::size_t>((slot_ / p) % static_cast<long>(arms_.size()));
                mask[blocked] = false;
            }
            break;
        }
    }
    return mask;
}

double ArmEnv::arm_loss(std::size_t k) const { return cur_loss_[k]; }

Vec ArmEnv::arm_constraints(std::size_t k) const {
    Vec g(n_constraints_);
    for (std::size_t n = 0; n < n_constraints_; ++n) g[n] = cur_constraints_(n, k);
    return g;
}

Vec ArmEnv::oracle_losses() const { return cur_loss_; }

Mat ArmEnv::oracle_constraints() const { return cur_constraints_; }

}  // namespace fogopt::env
