#include "fogopt/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "fogopt/dual.hpp"
#include "fogopt/exp3.hpp"
#include "fogopt/plot.hpp"
#include "fogopt/rl.hpp"
#include "fogopt/saddle.hpp"

namespace fogopt::runner {

using config::AlgoKind;
using config::ConfigMap;
using config::EnvKind;
using config::ExperimentConfig;
using config::ValidationError;
using core::Mat;
using core::RngStream;
using core::Vec;

namespace {

// stream ids keyed off the run seed; environment internals use 1-3
constexpr std::uint64_t kStreamMdpBuild = 10;
constexpr std::uint64_t kStreamErmProblem = 11;
constexpr std::uint64_t kStreamOfflineStates = 20;
constexpr std::uint64_t kStreamPerturb = 100;
constexpr std::uint64_t kStreamSagaIndex = 101;
constexpr std::uint64_t kStreamExplore = 102;
constexpr std::uint64_t kStreamArmSample = 103;
constexpr std::uint64_t kStreamMdpRun = 104;

std::string fmt(double v) { return format_double(v); }

// --------------------------------------------------------------------------
// config -> environment builders

env::DemandParams parse_demand(const ConfigMap& raw, const std::string& prefix) {
    env::DemandParams p;
    const std::string kind = raw.get_string(prefix + ".kind", "iid-uniform");
    try {
        p.kind = env::demand_kind_from_string(kind);
    } catch (const std::exception& e) {
        throw ValidationError(prefix + ".kind", e.what());
    }
    p.lo = raw.get_double(prefix + ".lo", 0.0);
    p.hi = raw.get_double(prefix + ".hi", 1.0);
    p.rho = raw.get_double(prefix + ".rho", 0.9);
    p.period = static_cast<int>(raw.get_long(prefix + ".period", 100));
    p.slope = raw.get_double(prefix + ".slope", 1e-3);
    p.d_max = raw.get_double(prefix + ".d_max", -1.0);
    if (p.lo < 0.0 || p.hi < p.lo) throw ValidationError(prefix + ".lo", "need 0 <= lo <= hi");
    if (p.kind == env::DemandKind::MarkovAr1 && !(p.rho >= 0.0 && p.rho < 1.0))
        throw ValidationError(prefix + ".rho", "AR coefficient must be in [0,1)");
    if (p.period < 1) throw ValidationError(prefix + ".period", "must be >= 1");
    return p;
}

std::vector<std::pair<int, int>> parse_edges(const ConfigMap& raw, const std::string& key,
                                             std::size_t n_nodes) {
    std::vector<std::pair<int, int>> edges;
    std::istringstream is(raw.get_string(key));
    std::string tok;
    while (is >> tok) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw ValidationError(key, "edge must look like `from:to`");
        try {
            const int u = std::stoi(tok.substr(0, colon));
            const int v = std::stoi(tok.substr(colon + 1));
            edges.emplace_back(u, v);
        } catch (const std::exception&) {
            throw ValidationError(key, "bad edge token: " + tok);
        }
    }
    for (auto [u, v] : edges)
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_nodes ||
            static_cast<std::size_t>(v) >= n_nodes || u == v)
            throw ValidationError(key, "edge endpoints out of range");
    return edges;
}

env::FogNetwork build_fog_network(const ConfigMap& raw) {
    const auto n_nodes = static_cast<std::size_t>(raw.get_long("environment.nodes", 3));
    if (n_nodes < 1) throw ValidationError("environment.nodes", "must be >= 1");
    env::FogNetwork net;
    net.n_nodes = n_nodes;
    if (raw.has("environment.edges")) {
        net.edges = parse_edges(raw, "environment.edges", n_nodes);
    } else {
        for (std::size_t n = 0; n + 1 < n_nodes; ++n)
            net.edges.emplace_back(static_cast<int>(n), static_cast<int>(n + 1));
    }
    const double edge_cap = raw.get_double("environment.edge_cap", 1.0);
    const double cloud_cap = raw.get_double("environment.cloud_cap", 2.0);
    const double local_cap = raw.get_double("environment.local_cap", 2.0);
    if (edge_cap < 0 || cloud_cap < 0 || local_cap < 0)
        throw ValidationError("environment.edge_cap", "caps must be nonnegative");
    const std::size_t d = net.dim();
    Vec hi(d, 0.0);
    net.delay_quad.assign(d, 0.0);
    net.delay_lin.assign(d, 0.0);
    const double qe = raw.get_double("environment.quad_edge", 0.08);
    const double qc = raw.get_double("environment.quad_cloud", 0.1);
    const double ql = raw.get_double("environment.quad_local", 0.05);
    const double le = raw.get_double("environment.lin_edge", 0.0);
    const double lc = raw.get_double("environment.lin_cloud", 0.0);
    const double ll = raw.get_double("environment.lin_local", 0.0);
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
        hi[e] = edge_cap;
        net.delay_quad[e] = qe;
        net.delay_lin[e] = le;
    }
    for (std::size_t n = 0; n < n_nodes; ++n) {
        hi[net.cloud_offset() + n] = cloud_cap;
        net.delay_quad[net.cloud_offset() + n] = qc;
        net.delay_lin[net.cloud_offset() + n] = lc;
        hi[net.local_offset() + n] = local_cap;
        net.delay_quad[net.local_offset() + n] = ql;
        net.delay_lin[net.local_offset() + n] = ll;
    }
    net.caps = core::BoxSet(Vec(d, 0.0), hi);
    net.jitter = raw.get_double("environment.jitter", 0.2);
    try {
        net.validate();
    } catch (const std::exception& e) {
        throw ValidationError("environment", e.what());
    }
    return net;
}

env::FogOcoEnv build_fog_env(const ExperimentConfig& cfg, std::uint64_t seed,
                             env::FeedbackMode mode, int eval_budget) {
    return env::FogOcoEnv(build_fog_network(cfg.raw), parse_demand(cfg.raw, "environment.demand"),
                          mode, seed, eval_budget);
}

env::ArmAvailability parse_availability(const ConfigMap& raw) {
    env::ArmAvailability a;
    const std::string kind = raw.get_string("environment.availability", "always");
    if (kind == "always") a.kind = env::AvailabilityKind::Always;
    else if (kind == "iid") a.kind = env::AvailabilityKind::IidBernoulli;
    else if (kind == "periodic") a.kind = env::AvailabilityKind::PeriodicBlocking;
    else throw ValidationError("environment.availability", "unknown kind: " + kind);
    a.rate = raw.get_double("environment.availability_rate", 0.8);
    a.period = static_cast<int>(raw.get_long("environment.availability_period", 50));
    if (a.kind == env::AvailabilityKind::IidBernoulli && !(a.rate > 0.0 && a.rate <= 1.0))
        throw ValidationError("environment.availability_rate", "must be in (0,1]");
    if (a.period < 1) throw ValidationError("environment.availability_period", "must be >= 1");
    return a;
}

env::ArmEnv build_arm_env(const ExperimentConfig& cfg, std::uint64_t seed) {
    const ConfigMap& raw = cfg.raw;
    const env::ArmAvailability avail = parse_availability(raw);
    if (cfg.environment == EnvKind::Arms) {
        Vec loss = raw.get_doubles("environment.loss");
        const std::size_t K = loss.size();
        if (K == 0) throw ValidationError("environment.loss", "need at least one arm");
        std::vector<Vec> rows;
        if (raw.has("environment.g")) rows.push_back(raw.get_doubles("environment.g"));
        for (int n = 0; n < 16; ++n) {
            const std::string key = "environment.g" + std::to_string(n);
            if (raw.has(key)) rows.push_back(raw.get_doubles(key));
        }
        if (rows.empty()) throw ValidationError("environment.g", "need at least one constraint row");
        Mat g(rows.size(), K);
        for (std::size_t n = 0; n < rows.size(); ++n) {
            if (rows[n].size() != K)
                throw ValidationError("environment.g", "constraint row length != number of arms");
            for (std::size_t k = 0; k < K; ++k) g(n, k) = rows[n][k];
        }
        std::vector<Vec> arms;
        for (std::size_t k = 0; k < K; ++k) arms.push_back(Vec{static_cast<double>(k)});
        return env::ArmEnv(std::move(arms), std::move(loss), std::move(g), avail, seed);
    }
    // arms-fog-grid
    env::FogNetwork net = build_fog_network(raw);
    const auto grid = static_cast<std::size_t>(raw.get_long("environment.grid_per_dim", 2));
    if (grid < 1) throw ValidationError("environment.grid_per_dim", "must be >= 1");
    const double deadline = raw.get_double("environment.deadline", 1.0);
    return env::ArmEnv(std::move(net), grid, deadline, parse_demand(raw, "environment.demand"),
                       avail, seed);
}

struct QueueSetup {
    env::QueueNetwork net;
    dual::QuadraticFamily family;
    env::DemandParams arrivals;
};

QueueSetup build_queue_env(const ExperimentConfig& cfg, std::uint64_t seed) {
    const ConfigMap& raw = cfg.raw;
    const auto n_nodes = static_cast<std::size_t>(raw.get_long("environment.nodes", 4));
    if (n_nodes < 2) throw ValidationError("environment.nodes", "must be >= 2");
    std::vector<std::pair<int, int>> edges;
    if (raw.has("environment.edges")) {
        edges = parse_edges(raw, "environment.edges", n_nodes);
    } else {
        // ring, both directions
        for (std::size_t n = 0; n < n_nodes; ++n) {
            edges.emplace_back(static_cast<int>(n), static_cast<int>((n + 1) % n_nodes));
            edges.emplace_back(static_cast<int>((n + 1) % n_nodes), static_cast<int>(n));
        }
    }
    Vec service = raw.has("environment.service") ? raw.get_doubles("environment.service")
                                                 : Vec(n_nodes, 1.0);
    if (service.size() == 1) service.assign(n_nodes, service[0]);
    if (service.size() != n_nodes)
        throw ValidationError("environment.service", "need one service rate per node");
    env::DemandParams arrivals = parse_demand(raw, "environment.demand");
    env::QueueNetwork net(n_nodes, edges, service, arrivals, seed);

    const std::size_t E = edges.size();
    dual::QuadraticFamily fam;
    Vec quad = raw.has("environment.flow_quad") ? raw.get_doubles("environment.flow_quad")
                                                : Vec(E, 0.5);
    Vec lin = raw.has("environment.flow_lin") ? raw.get_doubles("environment.flow_lin")
                                              : Vec(E, 0.05);
    if (quad.size() == 1) quad.assign(E, quad[0]);
    if (lin.size() == 1) lin.assign(E, lin[0]);
    if (quad.size() != E || lin.size() != E)
        throw ValidationError("environment.flow_quad", "need one coefficient per edge");
    const double cap = raw.get_double("environment.flow_cap", 2.0);
    if (cap <= 0.0) throw ValidationError("environment.flow_cap", "must be positive");
    fam.quad = std::move(quad);
    fam.lin = std::move(lin);
    fam.a_mat = net.incidence();
    fam.box = core::BoxSet(Vec(E, 0.0), Vec(E, cap));
    try {
        fam.validate();
    } catch (const std::exception& e) {
        throw ValidationError("environment.flow_quad", e.what());
    }
    return {std::move(net), std::move(fam), arrivals};
}

struct ErmSetup {
    dual::DualErm erm;
};

ErmSetup build_erm(const ExperimentConfig& cfg) {
    const ConfigMap& raw = cfg.raw;
    const auto dim = static_cast<std::size_t>(raw.get_long("environment.dim", 6));
    const auto n_cons = static_cast<std::size_t>(raw.get_long("environment.constraints", 4));
    const auto n_samples = static_cast<std::size_t>(raw.get_long("environment.samples", 100));
    const double eps = raw.get_double("environment.eps", 0.1);
    if (dim < 1) throw ValidationError("environment.dim", "must be >= 1");
    if (n_cons < 1) throw ValidationError("environment.constraints", "must be >= 1");
    if (eps <= 0.0) throw ValidationError("environment.eps", "must be positive");
    const auto problem_seed = static_cast<std::uint64_t>(raw.get_long("environment.problem_seed", 1234));

    RngStream rng(problem_seed, kStreamErmProblem);
    dual::QuadraticFamily fam;
    fam.quad.assign(dim, raw.get_double("environment.quad", 0.5));
    fam.lin.assign(dim, raw.get_double("environment.lin", 0.0));
    fam.box = core::BoxSet(Vec(dim, 0.0), Vec(dim, raw.get_double("environment.cap", 2.0)));
    fam.a_mat = Mat(n_cons, dim);
    // each coordinate serves two neighboring constraints
    for (std::size_t j = 0; j < dim; ++j) {
        const std::size_t n1 = j % n_cons;
        const std::size_t n2 = (j + 1) % n_cons;
        fam.a_mat(n1, j) = -rng.uniform(0.2, 0.8);
        if (n2 != n1) fam.a_mat(n2, j) = -rng.uniform(0.2, 0.8);
    }
    try {
        fam.validate();
    } catch (const std::exception& e) {
        throw ValidationError("environment.quad", e.what());
    }

    dual::DualErm erm;
    erm.family = std::move(fam);
    erm.eps = eps;
    if (raw.has("environment.states_file")) {
        erm.samples = dual::load_states(raw.get_string("environment.states_file"), n_cons);
        if (erm.samples.empty())
            throw ValidationError("environment.states_file", "file holds no state vectors");
    } else {
        const double s_lo = raw.get_double("environment.state_lo", 0.3);
        const double s_hi = raw.get_double("environment.state_hi", 0.9);
        if (s_lo > s_hi) throw ValidationError("environment.state_lo", "need lo <= hi");
        for (std::size_t n = 0; n < n_samples; ++n) {
            Vec s(n_cons);
            for (auto& v : s) v = rng.uniform(s_lo, s_hi);
            erm.samples.push_back(std::move(s));
        }
    }
    return {std::move(erm)};
}

env::FiniteMDP build_mdp(const ExperimentConfig& cfg, std::uint64_t seed) {
    const ConfigMap& raw = cfg.raw;
    const auto n_states = static_cast<std::size_t>(raw.get_long("environment.states", 5));
    const auto n_actions = static_cast<std::size_t>(raw.get_long("environment.actions", 3));
    const double discount = raw.get_double("environment.discount", 0.9);
    if (n_states < 1) throw ValidationError("environment.states", "must be >= 1");
    if (n_actions < 1) throw ValidationError("environment.actions", "must be >= 1");
    if (!(discount > 0.0 && discount < 1.0))
        throw ValidationError("environment.discount", "must be in (0,1)");
    RngStream rng(seed, kStreamMdpBuild);
    return env::random_mdp(n_states, n_actions, discount, rng);
}

saddle::SaddleConfig parse_saddle(const ConfigMap& raw) {
    saddle::SaddleConfig s;
    s.alpha = raw.get_double("algorithm.alpha", 0.0);
    s.mu = raw.get_double("algorithm.mu", 0.0);
    s.c_alpha = raw.get_double("algorithm.c_alpha", 1.0);
    s.c_mu = raw.get_double("algorithm.c_mu", 1.0);
    s.c_delta = raw.get_double("algorithm.c_delta", 1.0);
    s.delta = raw.get_double("algorithm.delta", 0.0);
    s.gamma = raw.get_double("algorithm.gamma", 0.0);
    s.adaptive = raw.get_bool("algorithm.adaptive", false);
    s.eps0 = raw.get_double("algorithm.eps0", 1e-6);
    s.m_evals = static_cast<int>(raw.get_long("algorithm.M", 4));
    if (s.c_alpha <= 0.0) throw ValidationError("algorithm.c_alpha", "must be positive");
    if (s.c_mu <= 0.0) throw ValidationError("algorithm.c_mu", "must be positive");
    if (s.m_evals < 2 || s.m_evals % 2 != 0)
        throw ValidationError("algorithm.M", "must be even and >= 2");
    return s;
}

// --------------------------------------------------------------------------
// per-kind runs

void base_report(Report& rep, const ExperimentConfig& cfg, long horizon, std::uint64_t seed) {
    rep["run.algorithm"] = to_string(cfg.algo);
    rep["run.environment"] = to_string(cfg.environment);
    rep["run.horizon"] = std::to_string(horizon);
    rep["run.seed"] = std::to_string(seed);
    rep["run.config_hash"] = cfg.hash();
    rep["run.version"] = kArtifactVersion;
}

RunResult run_fog(const ExperimentConfig& cfg, long horizon, std::uint64_t seed) {
    const AlgoKind a = cfg.algo;
    saddle::SaddleAlgo salgo = a == AlgoKind::Mosp             ? saddle::SaddleAlgo::Mosp
                               : a == AlgoKind::BanspOnePoint ? saddle::SaddleAlgo::BanspOnePoint
                                                              : saddle::SaddleAlgo::BanspMultiPoint;
    saddle::SaddleConfig scfg = parse_saddle(cfg.raw);
    const env::FeedbackMode mode = saddle::required_feedback(salgo);
    const int budget = salgo == saddle::SaddleAlgo::BanspMultiPoint ? scfg.m_evals : -1;
    env::FogOcoEnv environment = build_fog_env(cfg, seed, mode, budget);

    RunResult res;
    res.horizon = horizon;
    res.seed = seed;
    res.trace = saddle::run_saddle(environment, salgo, scfg, horizon,
                                   RngStream(seed, kStreamPerturb));
    res.trace.config_hash = cfg.hash();
    res.trace.seed = seed;
    res.trace.version = kArtifactVersion;
    base_report(res.report, cfg, horizon, seed);

    if (cfg.benchmark) {
        env::FogOcoEnv replay = build_fog_env(cfg, seed, env::FeedbackMode::FullInfo, -1);
        const bench::Comparator comp = bench::build_fog_comparator(replay, horizon);
        res.metrics = bench::metric_report(res.trace, comp);
        res.has_comparator = true;
        res.report["metrics.regret"] = fmt(res.metrics.regret);
        res.report["metrics.path_variation"] = fmt(res.metrics.path_variation);
    } else {
        res.metrics = bench::metric_report(res.trace);
    }
    res.report["metrics.fit"] = fmt(res.metrics.fit);
    double loss_sum = 0.0;
    for (const auto& r : res.trace.rows) loss_sum += r.loss;
    res.report["metrics.loss_total"] = fmt(loss_sum);
    return res;
}

RunResult run_arms(const ExperimentConfig& cfg, long horizon, std::uint64_t seed) {
    env::ArmEnv environment = build_arm_env(cfg, seed);
    exp3::ArmSet arms{environment.arms()};
    exp3::Exp3Config ecfg;
    ecfg.mu = cfg.raw.get_double("algorithm.mu", 0.0);
    ecfg.c_mu = cfg.raw.get_double("algorithm.c_mu", 1.0);
    ecfg.delta_reg = cfg.raw.get_double("algorithm.delta_reg", 1.0);
    if (ecfg.delta_reg <= 0.0) throw ValidationError("algorithm.delta_reg", "must be positive");

    RunResult res;
    res.horizon = horizon;
    res.seed = seed;
    res.trace = exp3::run_exp3sp(environment, arms, ecfg, horizon,
                                 RngStream(seed, kStreamArmSample));
    res.trace.config_hash = cfg.hash();
    res.trace.seed = seed;
    res.trace.version = kArtifactVersion;
    base_report(res.report, cfg, horizon, seed);

    if (cfg.benchmark) {
        // replay the cost sequence and benchmark against the best fixed
        // feasible distribution on it; the comparator is scored on all slots,
        // available or not
        env::ArmEnv replay = build_arm_env(cfg, seed);
        const std::size_t K = replay.n_arms();
        std::vector<Vec> loss_tables;
        loss_tables.reserve(static_cast<std::size_t>(horizon));
        Vec f_sum(K, 0.0);
        Mat g_sum(replay.n_constraints(), K);
        for (long t = 0; t < horizon; ++t) {
            (void)replay.next_mask();
            Vec f_t = replay.oracle_losses();
            const Mat g_t = replay.oracle_constraints();
            core::axpy(f_sum, 1.0, f_t);
            for (std::size_t i = 0; i < g_sum.data.size(); ++i) g_sum.data[i] += g_t.data[i];
            loss_tables.push_back(std::move(f_t));
        }
        const Vec p_star = bench::best_fixed_distribution(f_sum, g_sum);
        bench::Comparator comp;
        comp.optimal_losses.reserve(loss_tables.size());
        for (const auto& f_t : loss_tables) comp.optimal_losses.push_back(core::dot(f_t, p_star));
        res.metrics = bench::metric_report(res.trace, comp);
        res.has_comparator = true;
        res.report["metrics.regret"] = fmt(res.metrics.regret);
        std::string pstr;
        for (double v : p_star) pstr += (pstr.empty() ? "" : " ") + fmt(v);
        res.report["benchmark.best_fixed_distribution"] = pstr;
        res.report["notes.comparator"] =
            "best fixed feasible distribution, scored on every slot regardless of availability";
    } else {
        res.metrics = bench::metric_report(res.trace);
    }
    res.report["metrics.fit"] = fmt(res.metrics.fit);
    res.report["metrics.time_avg_violation"] =
        fmt(res.metrics.fit / static_cast<double>(horizon));
    res.report["environment.g_max"] = fmt(environment.g_max());
    return res;
}

RunResult run_erm(const ExperimentConfig& cfg, long horizon, std::uint64_t seed) {
    ErmSetup setup = build_erm(cfg);
    dual::DualErm& erm = setup.erm;
    const double alpha = cfg.raw.get_double("algorithm.alpha", 0.0) > 0.0
                             ? cfg.raw.get_double("algorithm.alpha", 0.0)
                             : dual::default_saga_alpha(erm);

    RunResult res;
    res.horizon = horizon;
    res.seed = seed;
    base_report(res.report, cfg, horizon, seed);
    res.trace.algorithm = to_string(cfg.algo);
    res.trace.environment = "erm";
    res.trace.config_hash = cfg.hash();
    res.trace.seed = seed;
    res.trace.version = kArtifactVersion;

    Vec lambda_star;
    if (cfg.benchmark) lambda_star = dual::solve_erm_optimum(erm, 1e-10);

    RngStream rng(seed, kStreamSagaIndex);
    const std::size_t n_lambda = erm.family.n_constraints();
    Vec lambda(n_lambda, 0.0);
    dual::SagaMemory mem;
    dual::SgdDualBaseline sgd;
    if (cfg.algo == AlgoKind::Saga) {
        mem = dual::init_memory(erm, lambda);
    } else {
        sgd.erm = &erm;
        sgd.lambda = lambda;
    }
    res.trace.rows.reserve(static_cast<std::size_t>(horizon));
    for (long k = 0; k < horizon; ++k) {
        if (cfg.algo == AlgoKind::Saga) {
            dual::saga_step(mem, erm, alpha, rng);
            lambda = mem.iterate;
        } else {
            const std::size_t nu = rng.uniform_index(erm.size());
            sgd.step(erm.samples[nu], 1.0 / (erm.eps * static_cast<double>(k + 1)));
            lambda = sgd.lambda;
        }
        TraceRow row;
        row.slot = k;
        row.decision = dual::lagrangian_argmin(erm.family, erm.samples[0], lambda);
        row.loss = erm.value(lambda);
        if (cfg.benchmark) row.constraint = {core::norm2(core::sub(lambda, lambda_star))};
        row.multiplier = lambda;
        row.rng_calls = rng.calls();
        res.trace.rows.push_back(std::move(row));
    }
    if (cfg.benchmark && !res.trace.rows.empty()) {
        res.report["metrics.lambda_error_final"] = fmt(res.trace.rows.back().constraint[0]);
        std::string ls;
        for (double v : lambda_star) ls += (ls.empty() ? "" : " ") + fmt(v);
        res.report["benchmark.lambda_star"] = ls;
        res.report["benchmark.condition_number"] = fmt(erm.condition_number());
    }
    res.report["metrics.dual_value_final"] = fmt(res.trace.rows.back().loss);
    res.report["algorithm.alpha_used"] = fmt(alpha);
    res.metrics = bench::metric_report(res.trace);
    res.metrics.fit = 0.0;  // the g column carries the gap to the optimum, not violations
    return res;
}

RunResult run_queue(const ExperimentConfig& cfg, long horizon, std::uint64_t seed) {
    QueueSetup setup = build_queue_env(cfg, seed);
    const ConfigMap& raw = cfg.raw;
    dual::LearnAdaptConfig lcfg;
    lcfg.mu = raw.get_double("algorithm.mu", 0.01);
    lcfg.bias_scale = raw.get_double("algorithm.bias_scale", 1.0);
    lcfg.k_steps = static_cast<int>(raw.get_long("algorithm.k_steps", 6));
    lcfg.alpha = raw.get_double("algorithm.alpha", 0.0);
    if (lcfg.mu <= 0.0) throw ValidationError("algorithm.mu", "must be positive");
    if (lcfg.k_steps < 1) throw ValidationError("algorithm.k_steps", "must be >= 1");
    const double eps = raw.get_double("algorithm.eps", 0.1);
    if (eps <= 0.0) throw ValidationError("algorithm.eps", "must be positive");
    const auto n_offline = static_cast<std::size_t>(raw.get_long("algorithm.offline_samples", 100));
    const bool learn = cfg.algo == AlgoKind::LaSaga;

    const std::size_t n_nodes = setup.net.n_nodes();
    dual::DualErm erm;
    erm.family = setup.family;
    erm.eps = eps;

    RngStream saga_rng(seed, kStreamSagaIndex);
    dual::SagaMemory mem;
    dual::LearnAdaptState st;
    st.mu = lcfg.mu;
    st.bias.assign(n_nodes, lcfg.bias_scale * std::sqrt(lcfg.mu));
    st.lambda.assign(n_nodes, 0.0);
    if (learn) {
        // offline phase: seed the ERM from historical exogenous vectors (a
        // state file when given, otherwise draws from the arrival process),
        // then run K iterations per sample on average
        if (raw.has("algorithm.offline_states_file")) {
            erm.samples = dual::load_states(raw.get_string("algorithm.offline_states_file"),
                                            n_nodes);
            if (erm.samples.empty())
                throw ValidationError("algorithm.offline_states_file", "file holds no states");
        } else {
            env::DemandParams arr = setup.arrivals;
            env::DemandProcess hist(n_nodes, arr, RngStream(seed, kStreamOfflineStates));
            for (std::size_t n = 0; n < std::max<std::size_t>(n_offline, 1); ++n) {
                Vec c = hist.next();
                core::axpy(c, -1.0, setup.net.service());
                erm.samples.push_back(std::move(c));
            }
        }
        const double alpha = lcfg.alpha > 0.0 ? lcfg.alpha : dual::default_saga_alpha(erm);
        mem = dual::init_memory(erm, st.lambda);
        const long offline_iters = static_cast<long>(erm.size()) * lcfg.k_steps;
        for (long k = 0; k < offline_iters; ++k) dual::saga_step(mem, erm, alpha, saga_rng);
        st.lambda = mem.iterate;
    }

    RunResult res;
    res.horizon = horizon;
    res.seed = seed;
    base_report(res.report, cfg, horizon, seed);
    res.trace.algorithm = to_string(cfg.algo);
    res.trace.environment = "queue-net";
    res.trace.config_hash = cfg.hash();
    res.trace.seed = seed;
    res.trace.version = kArtifactVersion;
    res.trace.rows.reserve(static_cast<std::size_t>(horizon));

    double obj_sum = 0.0, obj_last_q = 0.0, queue_sum = 0.0, queue_last_q = 0.0;
    const long last_quarter = horizon - horizon / 4;
    for (long t = 0; t < horizon; ++t) {
        Vec c_t = setup.net.next_exogenous();
        Vec x;
        if (learn) {
            x = dual::la_saga_slot(st, mem, erm, setup.net, c_t, lcfg, saga_rng);
        } else {
            // pure queue-price policy theta = mu q
            Vec theta = core::scale(setup.net.queues().q, lcfg.mu);
            x = dual::lagrangian_argmin(erm.family, c_t, theta);
            env::queue_step(setup.net, x, c_t);
        }
        TraceRow row;
        row.slot = t;
        row.loss = erm.family.objective(x);
        row.constraint = erm.family.constraint(x, c_t);
        row.queue = setup.net.queues().q;
        row.multiplier = st.lambda;
        row.decision = std::move(x);
        row.rng_calls = saga_rng.calls();
        obj_sum += row.loss;
        queue_sum += core::norm2(row.queue);
        if (t >= last_quarter) {
            obj_last_q += row.loss;
            queue_last_q += core::norm2(row.queue);
        }
        res.trace.rows.push_back(std::move(row));
    }
    res.report["metrics.obj_avg"] = fmt(obj_sum / static_cast<double>(horizon));
    res.report["metrics.queue_avg"] = fmt(queue_sum / static_cast<double>(horizon));
    const double lq = static_cast<double>(horizon - last_quarter);
    res.report["metrics.obj_avg_last_quarter"] = fmt(obj_last_q / lq);
    res.report["metrics.queue_avg_last_quarter"] = fmt(queue_last_q / lq);
    res.report["algorithm.b_over_mu"] =
        fmt(core::norm2(st.bias) / lcfg.mu);
    if (learn) {
        // offline set should be large enough relative to the conditioning
        const double kappa = erm.condition_number();
        res.report["algorithm.offline_samples"] = std::to_string(n_offline);
        res.report["algorithm.condition_number"] = fmt(kappa);
        res.report["algorithm.offline_size_ok"] =
            static_cast<double>(n_offline) >= 0.75 * kappa ? "true" : "false";
    }

    if (cfg.benchmark) {
        // stationary clairvoyant: solve the static problem at the mean state
        const Vec c_mean = setup.net.mean_exogenous();
        dual::DualErm stat;
        stat.family = setup.family;
        stat.eps = 1e-9;
        stat.samples.push_back(c_mean);
        const Vec lam = dual::solve_erm_optimum(stat, 1e-10);
        const Vec x_star = dual::lagrangian_argmin(setup.family, c_mean, lam);
        res.report["benchmark.obj_star"] = fmt(setup.family.objective(x_star));
        const Vec g_star = setup.family.constraint(x_star, c_mean);
        res.report["benchmark.stationary_max_violation"] = fmt(core::norm_inf(core::positive_part(g_star)));
        res.has_comparator = true;
    }
    res.metrics = bench::metric_report(res.trace);
    res.report["metrics.fit"] = fmt(res.metrics.fit);
    return res;
}

RunResult run_mdp(const ExperimentConfig& cfg, long horizon, std::uint64_t seed) {
    env::FiniteMDP mdp = build_mdp(cfg, seed);
    rl::ExploreSchedule sched;
    sched.eps0 = cfg.raw.get_double("algorithm.eps0", 1.0);
    sched.tau = cfg.raw.get_double("algorithm.tau", static_cast<double>(horizon));
    if (!(sched.eps0 > 0.0 && sched.eps0 <= 1.0))
        throw ValidationError("algorithm.eps0", "must be in (0,1]");
    if (sched.tau <= 0.0) throw ValidationError("algorithm.tau", "must be positive");
    const double q_init = cfg.raw.get_double("algorithm.q_init", 0.0);

    RunResult res;
    res.horizon = horizon;
    res.seed = seed;
    base_report(res.report, cfg, horizon, seed);

    rl::QTable q_star;
    const rl::QTable* ref = nullptr;
    if (cfg.benchmark) {
        q_star = rl::value_iteration(mdp, 1e-10);
        ref = &q_star;
    }
    rl::QTable q_final;
    res.trace = rl::run_qlearning(mdp, sched, horizon, RngStream(seed, kStreamMdpRun), &q_final,
                                  ref, q_init);
    res.trace.config_hash = cfg.hash();
    res.trace.seed = seed;
    res.trace.version = kArtifactVersion;

    if (cfg.benchmark) {
        double gap = 0.0;
        std::size_t match = 0;
        for (std::size_t s = 0; s < mdp.n_states; ++s) {
            for (std::size_t a = 0; a < mdp.n_actions; ++a)
                gap = std::max(gap, std::abs(q_final.q[s][a] - q_star.q[s][a]));
            if (q_final.greedy(s, mdp.available[s]) == q_star.greedy(s, mdp.available[s])) ++match;
        }
        res.report["metrics.q_gap_final"] = fmt(gap);
        res.report["metrics.policy_match"] =
            fmt(static_cast<double>(match) / static_cast<double>(mdp.n_states));
        res.report["metrics.bellman_residual"] = fmt(rl::bellman_residual(mdp, q_final));
        res.has_comparator = true;
    }
    res.metrics = bench::metric_report(res.trace);
    res.metrics.fit = 0.0;  // the g column carries the sup-norm gap, not violations
    return res;
}

}  // namespace

RunResult run_single(const ExperimentConfig& cfg, long horizon, std::uint64_t seed) {
    switch (cfg.environment) {
        case EnvKind::Fog: return run_fog(cfg, horizon, seed);
        case EnvKind::Arms:
        case EnvKind::ArmsFogGrid: return run_arms(cfg, horizon, seed);
        case EnvKind::Erm: return run_erm(cfg, horizon, seed);
        case EnvKind::QueueNet: return run_queue(cfg, horizon, seed);
        case EnvKind::Mdp: return run_mdp(cfg, horizon, seed);
    }
    throw std::logic_error("run_single: unhandled environment");
}

std::string report_to_text(const Report& rep) {
    // keys sharing a dotted prefix group under one section header
    std::ostringstream os;
    std::string section;
    for (const auto& [k, v] : rep) {
        const auto dot = k.find('.');
        const std::string sec = dot == std::string::npos ? "" : k.substr(0, dot);
        const std::string leaf = dot == std::string::npos ? k : k.substr(dot + 1);
        if (sec != section) {
            if (!section.empty() || !os.str().empty()) os << "\n";
            os << "[" << sec << "]\n";
            section = sec;
        }
        os << leaf << " = " << v << "\n";
    }
    return os.str();
}

Report report_from_text(const std::string& text) {
    const ConfigMap map = ConfigMap::parse(text);
    Report rep;
    for (const auto& [k, v] : map.entries()) rep[k] = v;
    return rep;
}

namespace {
std::string run_basename(const ExperimentConfig& cfg, long horizon, std::uint64_t seed) {
    return to_string(cfg.algo) + "_" + to_string(cfg.environment) + "_T" + std::to_string(horizon) +
           "_s" + std::to_string(seed);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << text;
}
}  // namespace

void emit_outputs(const RunResult& res, const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const std::string base = cfg.output_dir + "/" + run_basename(cfg, res.horizon, res.seed);
    write_trace_csv(res.trace, base + ".trace.csv");
    write_text(base + ".report.txt", report_to_text(res.report));
    if (cfg.plots) {
        std::vector<plot::Series> series;
        if (res.has_comparator && !res.metrics.regret_prefix.empty())
            series.push_back({"prefix regret", res.metrics.regret_prefix});
        if (!res.metrics.fit_prefix.empty())
            series.push_back({"prefix fit", res.metrics.fit_prefix});
        if (series.empty()) {
            core::Vec cum;
            double acc = 0.0;
            for (const auto& r : res.trace.rows) cum.push_back(acc += r.loss);
            series.push_back({"cumulative loss", cum});
        }
        plot::write_svg(plot::svg_loglog_chart(run_basename(cfg, res.horizon, res.seed), series),
                        base + ".svg");
    }
}

Report run_sweep(const ExperimentConfig& cfg) {
    struct Job {
        long horizon;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (long h : cfg.horizons)
        for (std::uint64_t s : cfg.seeds) jobs.push_back({h, s});

    int workers = cfg.workers;
    if (const char* envw = std::getenv("FOGOPT_WORKERS"); envw && *envw) workers = std::atoi(envw);
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));

    std::vector<RunResult> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            try {
                results[i] = run_single(cfg, jobs[i].horizon, jobs[i].seed);
                emit_outputs(results[i], cfg);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!errors[i].empty())
            throw std::runtime_error("run T=" + std::to_string(jobs[i].horizon) + " seed=" +
                                     std::to_string(jobs[i].seed) + " failed: " + errors[i]);

    // per-horizon means, then log-log slopes across the horizon grid
    Report summary;
    summary["sweep.name"] = cfg.name;
    summary["sweep.algorithm"] = to_string(cfg.algo);
    summary["sweep.environment"] = to_string(cfg.environment);
    summary["sweep.config_hash"] = cfg.hash();
    summary["sweep.version"] = kArtifactVersion;
    {
        std::string hs;
        for (long h : cfg.horizons) hs += (hs.empty() ? "" : " ") + std::to_string(h);
        summary["sweep.horizons"] = hs;
        std::string ss;
        for (auto s : cfg.seeds) ss += (ss.empty() ? "" : " ") + std::to_string(s);
        summary["sweep.seeds"] = ss;
    }
    const bool has_regret = !results.empty() && results.front().has_comparator &&
                            results.front().report.count("metrics.regret") > 0;
    core::Vec mean_regret, mean_fit;
    for (long h : cfg.horizons) {
        double reg = 0.0, fit = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            if (jobs[i].horizon != h) continue;
            reg += results[i].metrics.regret;
            fit += results[i].metrics.fit;
            ++n;
        }
        reg /= static_cast<double>(n);
        fit /= static_cast<double>(n);
        mean_regret.push_back(reg);
        mean_fit.push_back(fit);
        if (has_regret) summary["regret.mean_T" + std::to_string(h)] = fmt(reg);
        summary["fit.mean_T" + std::to_string(h)] = fmt(fit);
    }
    if (cfg.horizons.size() >= 4) {
        auto put_slope = [&](const std::string& name, const core::Vec& vals) {
            try {
                const bench::SlopeEstimate est = bench::slope_estimate(cfg.horizons, vals);
                if (est.all_excluded) {
                    summary["slopes." + name] = "better-than-any-power-law";
                } else {
                    summary["slopes." + name] = fmt(est.slope);
                    summary["slopes." + name + "_points"] = std::to_string(est.n_used);
                }
            } catch (const std::exception& e) {
                summary["slopes." + name] = std::string("unavailable: ") + e.what();
            }
        };
        if (has_regret) put_slope("regret", mean_regret);
        put_slope("fit", mean_fit);
    }
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    write_text(cfg.output_dir + "/summary.report.txt", report_to_text(summary));
    return summary;
}

int cmd_run(const std::string& config_path) {
    try {
        const ExperimentConfig cfg = config::load_experiment_file(config_path);
        const Report summary = run_sweep(cfg);
        std::cout << report_to_text(summary);
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_validate(const std::string& config_path) {
    try {
        const ExperimentConfig cfg = config::load_experiment_file(config_path);
        // dry-build the configured environment and algorithm parameters
        const std::uint64_t seed = cfg.seeds.front();
        switch (cfg.environment) {
            case EnvKind::Fog:
                (void)build_fog_env(cfg, seed, config::algo_feedback(cfg.algo), -1);
                (void)parse_saddle(cfg.raw);
                break;
            case EnvKind::Arms:
            case EnvKind::ArmsFogGrid: (void)build_arm_env(cfg, seed); break;
            case EnvKind::Erm: (void)build_erm(cfg); break;
            case EnvKind::QueueNet: (void)build_queue_env(cfg, seed); break;
            case EnvKind::Mdp: (void)build_mdp(cfg, seed); break;
        }
        std::cout << "ok: " << config_path << " (hash " << cfg.hash() << ")\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_plot(const std::vector<std::string>& trace_paths) {
    try {
        for (const auto& path : trace_paths) {
            const RunTrace trace = read_trace_csv(path);
            const bench::MetricReport rep = bench::metric_report(trace);
            core::Vec cum;
            double acc = 0.0;
            for (const auto& r : trace.rows) cum.push_back(acc += r.loss);
            std::vector<plot::Series> series{{"cumulative loss", cum}};
            if (!rep.fit_prefix.empty()) series.push_back({"prefix fit", rep.fit_prefix});
            std::string out = path;
            const std::string suffix = ".trace.csv";
            if (out.size() > suffix.size() && out.substr(out.size() - suffix.size()) == suffix)
                out.resize(out.size() - suffix.size());
            out += ".svg";
            plot::write_svg(plot::svg_loglog_chart(path, series), out);
            std::cout << "wrote " << out << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_report(const std::string& sweep_dir) {
    namespace fs = std::filesystem;
    try {
        struct Row {
            long horizon;
            double regret = 0.0, fit = 0.0;
            bool has_regret = false;
        };
        std::vector<Row> rows;
        std::vector<fs::path> files;
        for (const auto& ent : fs::directory_iterator(sweep_dir)) {
            const std::string name = ent.path().filename().string();
            if (name == "summary.report.txt") continue;
            if (name.size() > 11 && name.substr(name.size() - 11) == ".report.txt")
                files.push_back(ent.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& p : files) {
            std::ifstream is(p);
            std::ostringstream ss;
            ss << is.rdbuf();
            const Report rep = report_from_text(ss.str());
            if (!rep.count("run.horizon")) continue;
            Row row;
            row.horizon = std::stol(rep.at("run.horizon"));
            if (rep.count("metrics.fit")) row.fit = std::stod(rep.at("metrics.fit"));
            if (rep.count("metrics.regret")) {
                row.regret = std::stod(rep.at("metrics.regret"));
                row.has_regret = true;
            }
            rows.push_back(row);
        }
        if (rows.empty()) {
            std::cerr << "no run reports found in " << sweep_dir << "\n";
            return 1;
        }
        std::vector<long> horizons;
        for (const auto& r : rows)
            if (std::find(horizons.begin(), horizons.end(), r.horizon) == horizons.end())
                horizons.push_back(r.horizon);
        std::sort(horizons.begin(), horizons.end());
        Report summary;
        summary["sweep.source"] = sweep_dir;
        core::Vec mean_regret, mean_fit;
        bool any_regret = false;
        for (long h : horizons) {
            double reg = 0.0, fit = 0.0;
            std::size_t n = 0;
            for (const auto& r : rows) {
                if (r.horizon != h) continue;
                reg += r.regret;
                fit += r.fit;
                any_regret = any_regret || r.has_regret;
                ++n;
            }
            mean_regret.push_back(reg / static_cast<double>(n));
            mean_fit.push_back(fit / static_cast<double>(n));
            summary["fit.mean_T" + std::to_string(h)] = fmt(mean_fit.back());
            if (any_regret) summary["regret.mean_T" + std::to_string(h)] = fmt(mean_regret.back());
        }
        if (horizons.size() >= 4) {
            auto put = [&](const std::string& name, const core::Vec& vals) {
                try {
                    const bench::SlopeEstimate est = bench::slope_estimate(horizons, vals);
                    summary["slopes." + name] =
                        est.all_excluded ? "better-than-any-power-law" : fmt(est.slope);
                } catch (const std::exception& e) {
                    summary["slopes." + name] = std::string("unavailable: ") + e.what();
                }
            };
            put("fit", mean_fit);
            if (any_regret) put("regret", mean_regret);
        }
        std::cout << report_to_text(summary);
        write_text(sweep_dir + "/summary.report.txt", report_to_text(summary));
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace fogopt::runner
