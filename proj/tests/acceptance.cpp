// Acceptance suite: every criterion runs at its stated tolerance and prints
// one pass/fail line. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fogopt/bench.hpp"
#include "fogopt/config.hpp"
#include "fogopt/dual.hpp"
#include "fogopt/exp3.hpp"
#include "fogopt/rl.hpp"
#include "fogopt/runner.hpp"
#include "fogopt/saddle.hpp"

using namespace fogopt;
using core::Mat;
using core::RngStream;
using core::Vec;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s  --  %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// shared fog experiment: 3 nodes in a line (d = 8), slowly varying Markov
// demands, jittered quadratic delays
std::string fog_config(const std::string& algo, const std::string& horizons,
                       const std::string& seeds) {
    return "[experiment]\nname = acceptance\nseeds = " + seeds + "\nhorizons = " + horizons +
           "\noutput_dir = acc_out\nbenchmark = true\n"
           "[algorithm]\nid = " + algo + "\nM = 4\n"
           "[environment]\nid = fog\nnodes = 3\nedge_cap = 1.0\ncloud_cap = 2.0\n"
           "local_cap = 2.0\nquad_edge = 0.08\nquad_cloud = 0.1\nquad_local = 0.05\n"
           "jitter = 0.2\n"
           "[environment.demand]\nkind = markov-ar1\nlo = 0.45\nhi = 0.55\nrho = 0.99\n";
}

std::string seed_list(int n) {
    std::string s;
    for (int i = 1; i <= n; ++i) s += (i > 1 ? " " : "") + std::to_string(i);
    return s;
}

struct SweepMeans {
    std::vector<long> horizons;
    Vec regret;
    Vec fit;
};

SweepMeans run_fog_sweep(const std::string& algo, const std::vector<long>& horizons, int n_seeds) {
    const config::ExperimentConfig cfg = config::load_experiment(config::ConfigMap::parse(
        fog_config(algo, "1024", seed_list(n_seeds))));
    SweepMeans out;
    out.horizons = horizons;
    for (long T : horizons) {
        double reg = 0.0, fit = 0.0;
        for (int seed = 1; seed <= n_seeds; ++seed) {
            const runner::RunResult res = runner::run_single(cfg, T, seed);
            reg += res.metrics.regret / n_seeds;
            fit += res.metrics.fit / n_seeds;
        }
        out.regret.push_back(reg);
        out.fit.push_back(fit);
    }
    return out;
}

std::string slope_str(const bench::SlopeEstimate& est) {
    if (est.all_excluded) return "<=0 everywhere (better than any power law)";
    return fmt(est.slope) + " (se " + fmt(est.std_error) + ")";
}

// slope <= bound, with nonpositive metrics counting as better than any power law
bool slope_ok(const bench::SlopeEstimate& est, double bound) {
    return est.all_excluded || est.slope <= bound;
}

void criterion_1_mosp() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<long> horizons{1024, 2048, 4096, 8192, 16384, 32768, 65536};
    const SweepMeans m = run_fog_sweep("mosp", horizons, 20);
    const bench::SlopeEstimate fit_s = bench::slope_estimate(m.horizons, m.fit);
    const bench::SlopeEstimate reg_s = bench::slope_estimate(m.horizons, m.regret);
    const double ratio_lhs = m.fit.back() / static_cast<double>(horizons.back());
    const double ratio_rhs = m.fit.front() / static_cast<double>(horizons.front());
    const double secs = elapsed_s(t0);
    const bool pass = slope_ok(fit_s, 0.65) && slope_ok(reg_s, 0.80) &&
                      ratio_lhs <= 0.05 * ratio_rhs + 1e-12 && secs <= 120.0;
    report(1, "MOSP sublinear fit and regret",
           pass,
           "fit slope " + slope_str(fit_s) + ", regret slope " + slope_str(reg_s) +
               ", fit/T " + fmt(ratio_lhs) + " vs 0.05 x " + fmt(ratio_rhs) + " at T=2^10, " +
               fmt(secs) + " s (limit 120)");
}

void criterion_2_bansp_one_point() {
    const std::vector<long> horizons{1024, 2048, 4096, 8192, 16384, 32768, 65536};
    const SweepMeans m = run_fog_sweep("bansp1", horizons, 20);
    const bench::SlopeEstimate fit_s = bench::slope_estimate(m.horizons, m.fit);
    const bench::SlopeEstimate reg_s = bench::slope_estimate(m.horizons, m.regret);
    const bool strictly_sublinear =
        (fit_s.all_excluded || fit_s.slope + fit_s.std_error < 1.0) &&
        (reg_s.all_excluded || reg_s.slope + reg_s.std_error < 1.0);
    const bool pass = slope_ok(fit_s, 0.90) && slope_ok(reg_s, 0.95) && strictly_sublinear;
    report(2, "BanSP one-point sublinearity", pass,
           "fit slope " + slope_str(fit_s) + ", regret slope " + slope_str(reg_s));
}

void criterion_3_multi_point() {
    const int n_seeds = 20;
    const long T = 16384;
    const config::ExperimentConfig one = config::load_experiment(
        config::ConfigMap::parse(fog_config("bansp1", "16384", seed_list(n_seeds))));
    const config::ExperimentConfig multi = config::load_experiment(
        config::ConfigMap::parse(fog_config("banspM", "16384", seed_list(n_seeds))));
    double reg1 = 0.0, regM = 0.0;
    for (int seed = 1; seed <= n_seeds; ++seed) {
        reg1 += runner::run_single(one, T, seed).metrics.regret / n_seeds;
        regM += runner::run_single(multi, T, seed).metrics.regret / n_seeds;
    }
    const std::vector<long> horizons{1024, 2048, 4096, 8192, 16384};
    const SweepMeans m = run_fog_sweep("banspM", horizons, n_seeds);
    const bench::SlopeEstimate fit_s = bench::slope_estimate(m.horizons, m.fit);
    const bool pass = regM <= 0.7 * reg1 && slope_ok(fit_s, 0.70);
    report(3, "multi-point improvement over one-point", pass,
           "regret M=4 " + fmt(regM) + " vs 0.7 x " + fmt(reg1) + " one-point at T=2^14, fit slope " +
               slope_str(fit_s));
}

std::string arm_config(const std::string& horizons, const std::string& seeds) {
    return "[experiment]\nname = acceptance\nseeds = " + seeds + "\nhorizons = " + horizons +
           "\noutput_dir = acc_out\nbenchmark = true\n"
           "[algorithm]\nid = exp3sp\n"
           "[environment]\nid = arms\nloss = 0.30 0.32 0.35 0.55 0.70\n"
           "g = 0.5 -0.1 -0.3 -0.2 -0.4\navailability = iid\navailability_rate = 0.8\n";
}

void criterion_4_exp3sp() {
    const int n_seeds = 10;
    const config::ExperimentConfig cfg = config::load_experiment(
        config::ConfigMap::parse(arm_config("4096", seed_list(n_seeds))));
    const double g_max = 0.5;
    double viol = 0.0;
    for (int seed = 1; seed <= n_seeds; ++seed) {
        const runner::RunResult res = runner::run_single(cfg, 100000, seed);
        viol += res.metrics.fit / 100000.0 / n_seeds;
    }
    const std::vector<long> horizons{4096, 8192, 16384, 32768, 65536};
    Vec mean_reg(horizons.size(), 0.0);
    for (std::size_t h = 0; h < horizons.size(); ++h)
        for (int seed = 1; seed <= n_seeds; ++seed)
            mean_reg[h] += runner::run_single(cfg, horizons[h], seed).metrics.regret / n_seeds;
    const bench::SlopeEstimate reg_s = bench::slope_estimate(horizons, mean_reg);
    const bool pass = viol <= 0.05 * g_max && slope_ok(reg_s, 0.90);
    report(4, "EXP3SP violation and regret vs best fixed distribution", pass,
           "time-avg violation " + fmt(viol) + " (limit " + fmt(0.05 * g_max) +
               "), regret slope " + slope_str(reg_s));
}

dual::DualErm acceptance_erm() {
    // the erm environment's construction at problem seed 1234
    dual::DualErm erm;
    erm.eps = 0.1;
    RngStream rng(1234, 11);
    dual::QuadraticFamily fam;
    const std::size_t dim = 6, n_cons = 4;
    fam.quad.assign(dim, 0.5);
    fam.lin.assign(dim, 0.0);
    fam.box = core::BoxSet(Vec(dim, 0.0), Vec(dim, 2.0));
    fam.a_mat = Mat(n_cons, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        fam.a_mat(j % n_cons, j) = -rng.uniform(0.2, 0.8);
        if ((j + 1) % n_cons != j % n_cons) fam.a_mat((j + 1) % n_cons, j) = -rng.uniform(0.2, 0.8);
    }
    erm.family = fam;
    for (int n = 0; n < 100; ++n) {
        Vec s(n_cons);
        for (auto& v : s) v = rng.uniform(0.3, 0.9);
        erm.samples.push_back(std::move(s));
    }
    return erm;
}

void criterion_5_saga_rate() {
    dual::DualErm erm = acceptance_erm();
    const long n = 100;
    const Vec lam_star = dual::solve_erm_optimum(erm, 1e-12);
    const double alpha = 0.5 * dual::default_saga_alpha(erm);
    dual::SagaMemory mem = dual::init_memory(erm, Vec(4, 0.0));
    RngStream rng(10, 101);
    std::vector<double> log_err;
    double err_at_60_epochs = 1e300;
    for (long k = 1; k <= 60 * n; ++k) {
        dual::saga_step(mem, erm, alpha, rng);
        const double err = core::norm2(core::sub(mem.iterate, lam_star));
        if (k >= 5 * n && k <= 50 * n) log_err.push_back(std::log(std::max(err, 1e-300)));
        err_at_60_epochs = err;
    }
    const double m = static_cast<double>(log_err.size());
    double mx = (m - 1) / 2.0, my = 0.0;
    for (double v : log_err) my += v / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < log_err.size(); ++i) {
        const double dx = i - mx, dy = log_err[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double r2 = sxy * sxy / (sxx * syy);
    const double slope = sxy / sxx;

    dual::SgdDualBaseline sgd;
    sgd.erm = &erm;
    sgd.lambda = Vec(4, 0.0);
    RngStream srng(10, 101);
    for (long k = 1; k <= 60 * n; ++k) {
        const std::size_t nu = srng.uniform_index(erm.size());
        sgd.step(erm.samples[nu], 1.0 / (erm.eps * static_cast<double>(k)));
    }
    const double sgd_err = core::norm2(core::sub(sgd.lambda, lam_star));
    const bool pass = slope < 0.0 && r2 >= 0.95 && err_at_60_epochs <= 1e-8 && sgd_err >= 1e-3;
    report(5, "SAGA linear rate vs SGD baseline", pass,
           "log-error R^2 " + fmt(r2) + " on [5N,50N], error " + fmt(err_at_60_epochs) +
               " after 60 epochs (limit 1e-8), sgd error " + fmt(sgd_err) + " (floor 1e-3)");
}

std::string queue_config(const std::string& algo, double mu) {
    return "[experiment]\nname = acceptance\nseeds = 1\nhorizons = 100000\n"
           "output_dir = acc_out\nbenchmark = true\n"
           "[algorithm]\nid = " + algo + "\nmu = " + format_double(mu) +
           "\nbias_scale = 1.0\nk_steps = 6\neps = 0.1\noffline_samples = 100\n"
           "[environment]\nid = queue-net\nnodes = 4\nedges = 0:2 0:3 1:2 1:3\n"
           "service = 0.2 0.2 1.2 1.2\nflow_quad = 0.5\nflow_lin = 0.3\nflow_cap = 2.0\n"
           "[environment.demand]\nkind = iid-uniform\nlo = 0.5\nhi = 0.7\n";
}

void criterion_6_la_saga_tradeoff() {
    const int n_seeds = 5;
    const long T = 100000;
    double la_q_small = 0.0, qp_q_small = 0.0, la_obj = 0.0, obj_star = 0.0;
    double la_q_big = 0.0, qp_q_big = 0.0;
    for (int seed = 1; seed <= n_seeds; ++seed) {
        for (double mu : {0.1, 0.01}) {
            const auto la_cfg = config::load_experiment(
                config::ConfigMap::parse(queue_config("la-saga", mu)));
            const auto qp_cfg = config::load_experiment(
                config::ConfigMap::parse(queue_config("queue-price", mu)));
            const runner::RunResult la = runner::run_single(la_cfg, T, seed);
            const runner::RunResult qp = runner::run_single(qp_cfg, T, seed);
            const double laq = std::stod(la.report.at("metrics.queue_avg_last_quarter"));
            const double qpq = std::stod(qp.report.at("metrics.queue_avg_last_quarter"));
            if (mu == 0.01) {
                la_q_small += laq / n_seeds;
                qp_q_small += qpq / n_seeds;
                la_obj += std::stod(la.report.at("metrics.obj_avg")) / n_seeds;
                obj_star = std::stod(la.report.at("benchmark.obj_star"));
            } else {
                la_q_big += laq / n_seeds;
                qp_q_big += qpq / n_seeds;
            }
        }
    }
    const bool pass = la_q_small <= 0.5 * qp_q_small &&
                      std::abs(la_obj - obj_star) <= 0.1 * std::abs(obj_star);
    report(6, "LA-SAGA queue/optimality tradeoff", pass,
           "queues at mu=0.01: " + fmt(la_q_small) + " vs 0.5 x " + fmt(qp_q_small) +
               " baseline (mu=0.1: " + fmt(la_q_big) + " vs " + fmt(qp_q_big) +
               "), time-avg objective " + fmt(la_obj) + " vs stationary optimum " + fmt(obj_star));
}

void criterion_7_qlearning() {
    const int n_seeds = 20;
    double mean_gap = 0.0, worst_gap = 0.0;
    int match = 0, total = 0;
    for (int seed = 1; seed <= n_seeds; ++seed) {
        RngStream rng(seed, 10);
        const env::FiniteMDP mdp = env::random_mdp(5, 3, 0.9, rng);
        const rl::QTable q_star = rl::value_iteration(mdp, 1e-10);
        rl::ExploreSchedule sched;
        sched.eps0 = 1.0;
        sched.tau = 200000.0;
        rl::QTable q_final;
        rl::run_qlearning(mdp, sched, 200000, RngStream(seed, 104), &q_final);
        double gap = 0.0;
        for (std::size_t s = 0; s < 5; ++s) {
            for (std::size_t a = 0; a < 3; ++a)
                gap = std::max(gap, std::abs(q_final.q[s][a] - q_star.q[s][a]));
            if (q_final.greedy(s, mdp.available[s]) == q_star.greedy(s, mdp.available[s])) ++match;
            ++total;
        }
        mean_gap += gap / n_seeds;
        worst_gap = std::max(worst_gap, gap);
    }
    const double match_rate = static_cast<double>(match) / total;
    const bool gap_ok = mean_gap <= 0.05;
    const bool pass = gap_ok && match_rate >= 0.95;
    report(7, "Q-learning vs Bellman oracle", pass,
           "mean max|Q-Q*| " + fmt(mean_gap) + " (worst " + fmt(worst_gap) +
               ", limit 0.05), greedy policy match " + fmt(100.0 * match_rate) + "% (floor 95%)" +
               (gap_ok ? ""
                       : "; note: 1/visit-count stepsizes decay the value-level error like "
                         "n^(gamma-1), far too slowly to reach 0.05 at gamma=0.9 within 2e5 steps"));
}

void criterion_8_estimator_calibration() {
    // fixed smooth quadratic with smoothness L = 1, evaluated near its
    // minimizer; on quadratics the sphere-smoothing bias is exactly zero, so
    // the measured bias is the Monte-Carlo component, which scales with delta
    const Vec h{1.0, 0.5, 0.25, 0.75};
    const Vec center{0.3, -0.2, 0.5, 0.1};
    Vec xh = center;
    xh[0] += 0.005;
    auto loss = [&](const Vec& x) {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) acc += 0.5 * h[i] * (x[i] - center[i]) * (x[i] - center[i]);
        return acc;
    };
    Vec truth(4, 0.0);
    truth[0] = 0.005;
    auto cons = [](const Vec&) { return Vec{}; };
    auto jac = [](const Vec&) { return Mat(0, 4); };
    const double l_smooth = 1.0;
    double bias1[2] = {0, 0}, bias2[2] = {0, 0};
    const double deltas[2] = {0.1, 0.01};
    for (int di = 0; di < 2; ++di) {
        RngStream rng(7, 0);
        Vec mean1(4, 0.0), mean2(4, 0.0);
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            env::SlotFunctions s1(env::FeedbackMode::OnePoint, -1, loss, nullptr, cons, jac);
            core::axpy(mean1, 1.0 / n,
                       saddle::one_point_gradient(s1, xh, deltas[di], rng).grad);
            env::SlotFunctions s2(env::FeedbackMode::MultiPoint, -1, loss, nullptr, cons, jac);
            core::axpy(mean2, 1.0 / n,
                       saddle::multi_point_gradient(s2, xh, deltas[di], 2, rng).grad);
        }
        bias1[di] = core::norm2(core::sub(mean1, truth));
        bias2[di] = core::norm2(core::sub(mean2, truth));
    }
    const bool pass = bias1[0] <= l_smooth * deltas[0] && bias1[1] <= l_smooth * deltas[1] &&
                      bias1[1] <= 0.5 * bias1[0] && bias2[0] <= 20.0 * deltas[0] * deltas[0] &&
                      bias2[1] <= 20.0 * deltas[1] * deltas[1];
    report(8, "one-point and paired estimator calibration", pass,
           "one-point bias " + fmt(bias1[0]) + " @ delta 0.1, " + fmt(bias1[1]) +
               " @ 0.01 (limits L*delta; halving verified), paired bias " + fmt(bias2[0]) + ", " +
               fmt(bias2[1]) + " (limits 20 delta^2)");
}

void criterion_9_oracle_cross_validation() {
    // clairvoyant vs refined 1e-3 grid search on 100 random 2-D instances
    RngStream rng(41, 0);
    double worst = 0.0;
    bool grid_ok = true;
    for (int rep = 0; rep < 100; ++rep) {
        const Vec quad{rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0)};
        const Vec lin{rng.uniform(-2.0, 0.5), rng.uniform(-2.0, 0.5)};
        Mat j(1, 2);
        j(0, 0) = rng.uniform(0.3, 1.0);
        j(0, 1) = rng.uniform(0.3, 1.0);
        const Vec off{rng.uniform(-1.5, -0.2)};
        auto loss = [&](const Vec& x) {
            return quad[0] * x[0] * x[0] + lin[0] * x[0] + quad[1] * x[1] * x[1] + lin[1] * x[1];
        };
        auto grad = [&](const Vec& x) {
            return Vec{2 * quad[0] * x[0] + lin[0], 2 * quad[1] * x[1] + lin[1]};
        };
        auto cons = [&](const Vec& x) {
            Vec g = j.mul(x);
            g[0] += off[0];
            return g;
        };
        auto cj = [&](const Vec&) { return j; };
        env::SlotFunctions slot(env::FeedbackMode::FullInfo, -1, loss, grad, cons, cj);
        slot.set_quadratic_form({quad, lin});
        core::BoxSet box(Vec{0.0, 0.0}, Vec{1.0, 1.0});
        const Vec x = bench::clairvoyant_slot(slot, box, 1e-8);
        double best = 1e300;
        Vec bx(2, 0.0);
        for (int a = 0; a <= 1000; ++a)
            for (int b = 0; b <= 1000; ++b) {
                const Vec y{a * 1e-3, b * 1e-3};
                if (j.mul(y)[0] + off[0] > 0) continue;
                const double f = loss(y);
                if (f < best) {
                    best = f;
                    bx = y;
                }
            }
        // refine around the incumbent so the oracle error is far below 1e-4
        const double hstep = 1e-3 / 64.0;
        for (int a = -128; a <= 128; ++a)
            for (int b = -128; b <= 128; ++b) {
                Vec y{bx[0] + a * hstep, bx[1] + b * hstep};
                y = core::project_box(y, box);
                if (j.mul(y)[0] + off[0] > 0) continue;
                best = std::min(best, loss(y));
            }
        worst = std::max(worst, std::abs(loss(x) - best));
        grid_ok = grid_ok && worst <= 1e-4;
    }

    // invariant suites at >= 1e3 random cases each
    bool proj_ok = true;
    {
        RngStream prng(11, 0);
        for (int rep = 0; rep < 1000; ++rep) {
            const std::size_t d = 1 + prng.uniform_index(4);
            Vec lo(d), hi(d), x(d);
            for (std::size_t i = 0; i < d; ++i) {
                lo[i] = prng.uniform(-2, 0);
                hi[i] = lo[i] + prng.uniform(0.1, 3);
                x[i] = prng.uniform(-5, 5);
            }
            core::BoxSet box(lo, hi);
            const Vec p = core::project_box(x, box);
            proj_ok = proj_ok && core::project_box(p, box) == p && box.contains(p, 1e-15);
            for (int k = 0; k < 3; ++k) {
                Vec y(d);
                for (std::size_t i = 0; i < d; ++i) y[i] = prng.uniform(lo[i], hi[i]);
                proj_ok = proj_ok &&
                          core::norm2(core::sub(x, p)) <= core::norm2(core::sub(x, y)) + 1e-12;
            }
        }
    }
    bool queue_ok = true;
    {
        env::DemandParams arr;
        arr.kind = env::DemandKind::IidUniform;
        arr.lo = 0.0;
        arr.hi = 1.0;
        env::QueueNetwork net(2, {{0, 1}}, Vec{0.4, 0.4}, arr, 5);
        RngStream qrng(6, 0);
        Vec ref(2, 0.0);
        for (int t = 0; t < 1000; ++t) {
            const Vec x{qrng.uniform(0, 2)};
            const Vec c{qrng.uniform(-1, 1), qrng.uniform(-1, 1)};
            ref[0] = std::max(ref[0] - x[0] + c[0], 0.0);
            ref[1] = std::max(ref[1] + x[0] + c[1], 0.0);
            env::queue_step(net, x, c);
            queue_ok = queue_ok && std::abs(net.queues().q[0] - ref[0]) <= 1e-12 &&
                       std::abs(net.queues().q[1] - ref[1]) <= 1e-12 && net.queues().q[0] >= 0 &&
                       net.queues().q[1] >= 0;
        }
    }
    bool imp_ok = true;
    {
        RngStream irng(9, 0);
        for (int rep = 0; rep < 1000; ++rep) {
            const std::size_t K = 2 + irng.uniform_index(5);
            exp3::WeightState st = exp3::make_weight_state(K, 1, 0.1, 1.0);
            for (auto& lw : st.log_weights) lw = irng.uniform(-2, 2);
            std::vector<bool> mask(K, false);
            std::size_t n_avail = 0;
            for (std::size_t k = 0; k < K; ++k) {
                mask[k] = irng.bernoulli(0.6);
                n_avail += mask[k];
            }
            if (n_avail == 0) mask[irng.uniform_index(K)] = true;
            const Vec p = exp3::restrict_distribution(st, mask);
            double sum = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                imp_ok = imp_ok && p[k] >= 0.0 && (mask[k] || p[k] == 0.0);
                sum += p[k];
            }
            imp_ok = imp_ok && std::abs(sum - 1.0) <= 1e-12;
            // one play: the importance estimate divides by the played mass
            std::size_t played = 0;
            double u = irng.uniform01(), acc = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                if (p[k] <= 0) continue;
                acc += p[k];
                played = k;
                if (u < acc) break;
            }
            const double f_val = irng.uniform(0, 1);
            const exp3::Estimates est =
                exp3::importance_estimates(p, played, f_val, Vec{irng.uniform(-1, 1)});
            imp_ok = imp_ok && std::abs(est.loss[played] - f_val / p[played]) <= 1e-12;
            for (std::size_t k = 0; k < K; ++k)
                if (k != played) imp_ok = imp_ok && est.loss[k] == 0.0;
        }
    }
    const bool pass = grid_ok && proj_ok && queue_ok && imp_ok;
    report(9, "oracle cross-validation and invariant suites", pass,
           "clairvoyant vs grid worst gap " + fmt(worst) +
               " (limit 1e-4), projections/queues/importance suites " +
               std::string(proj_ok && queue_ok && imp_ok ? "all green" : "FAILED"));
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void criterion_10_reproducibility() {
    namespace fs = std::filesystem;
    bool pass = true;
    std::string detail;
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"mosp", fog_config("mosp", "256", "2")},
        {"exp3sp", arm_config("512", "2")},
        {"la-saga", queue_config("la-saga", 0.01)},
    };
    for (const auto& [name, text] : cases) {
        for (const char* dir : {"acc_rep_a", "acc_rep_b"}) {
            fs::remove_all(dir);
            config::ConfigMap map = config::ConfigMap::parse(text);
            map.set("experiment.output_dir", dir);
            map.set("experiment.horizons", name == "la-saga" ? "512" : map.get_string("experiment.horizons"));
            map.set("experiment.seeds", "2");
            (void)runner::run_sweep(config::load_experiment(map));
        }
        for (const auto& ent : fs::directory_iterator("acc_rep_a")) {
            const std::string fname = ent.path().filename().string();
            if (fname.find(".trace.csv") == std::string::npos) continue;
            if (slurp(ent.path().string()) != slurp(std::string("acc_rep_b/") + fname)) {
                pass = false;
                detail += " " + name + "/" + fname + " differs;";
            }
        }
        fs::remove_all("acc_rep_a");
        fs::remove_all("acc_rep_b");
    }
    report(10, "byte-identical reruns", pass,
           pass ? "mosp, exp3sp, and la-saga traces reproduced byte-for-byte" : detail);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion_1_mosp();
    criterion_2_bansp_one_point();
    criterion_3_multi_point();
    criterion_4_exp3sp();
    criterion_5_saga_rate();
    criterion_6_la_saga_tradeoff();
    criterion_7_qlearning();
    criterion_8_estimator_calibration();
    criterion_9_oracle_cross_validation();
    criterion_10_reproducibility();
    std::printf("%d/10 criteria passed in %.1f s\n", 10 - g_failures, elapsed_s(t0));
    return g_failures;
}
