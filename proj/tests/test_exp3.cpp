#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fogopt/bench.hpp"
#include "fogopt/exp3.hpp"

using namespace fogopt;
using namespace fogopt::exp3;
using core::Mat;
using core::RngStream;
using core::Vec;

TEST_CASE("restricted distribution renormalizes over the mask") {
    WeightState st = make_weight_state(4, 1, 0.1, 1.0);
    const Vec p = restrict_distribution(st, {true, false, true, false});
    CHECK(p == Vec{0.5, 0.0, 0.5, 0.0});

    const Vec single = restrict_distribution(st, {false, false, true, false});
    CHECK(single == Vec{0.0, 0.0, 1.0, 0.0});

    WeightState w = make_weight_state(3, 1, 0.1, 1.0);
    w.log_weights = {std::log(2.0), 0.0, 0.0};
    const Vec prop = restrict_distribution(w, {true, true, true});
    CHECK(prop[0] == doctest::Approx(0.5));
    CHECK(prop[1] == doctest::Approx(0.25));
    CHECK(prop[2] == doctest::Approx(0.25));

    CHECK_THROWS_AS(restrict_distribution(st, {false, false, false, false}),
                    std::invalid_argument);
}

TEST_CASE("importance estimates reweight only the played arm") {
    Estimates est = importance_estimates(Vec{0.5, 0.5}, 0, 0.8, Vec{0.4});
    CHECK(est.loss[0] == doctest::Approx(1.6));
    CHECK(est.loss[1] == 0.0);
    CHECK(est.cons(0, 0) == doctest::Approx(0.8));
    CHECK(est.cons(0, 1) == 0.0);

    est = importance_estimates(Vec{1.0}, 0, 0.7, Vec{-0.2});
    CHECK(est.loss[0] == doctest::Approx(0.7));
    CHECK(est.cons(0, 0) == doctest::Approx(-0.2));

    CHECK_THROWS_AS(importance_estimates(Vec{0.0, 1.0}, 0, 0.5, Vec{0.0}),
                    std::invalid_argument);
}

TEST_CASE("importance estimates are unbiased at a fixed distribution") {
    const Vec p{0.5, 0.25, 0.25};
    const Vec truth{0.8, 0.4, 0.6};
    const Vec g_truth{0.5, -0.5, 0.2};
    RngStream rng(3, 0);
    Vec mean_f(3, 0.0), mean_g(3, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform01();
        const std::size_t k = u < 0.5 ? 0 : (u < 0.75 ? 1 : 2);
        const Estimates est = importance_estimates(p, k, truth[k], Vec{g_truth[k]});
        for (std::size_t a = 0; a < 3; ++a) {
            mean_f[a] += est.loss[a] / n;
            mean_g[a] += est.cons(0, a) / n;
        }
    }
    for (std::size_t a = 0; a < 3; ++a) {
        CHECK(std::abs(mean_f[a] - truth[a]) <= 0.01);
        CHECK(std::abs(mean_g[a] - g_truth[a]) <= 0.01);
    }
}

TEST_CASE("exp3sp step identities") {
    WeightState st = make_weight_state(2, 1, 0.0, 2.0);  // mu = 0
    st.lambda = {0.7};
    Estimates est;
    est.loss = {1.0, 0.0};
    est.cons = Mat(1, 2);
    est.cons(0, 0) = 3.0;
    const WeightState frozen = exp3sp_step(st, Vec{0.5, 0.5}, est);
    CHECK(frozen.log_weights == st.log_weights);
    CHECK(frozen.lambda == st.lambda);

    // zero estimates shrink the multiplier by (1 - delta mu^2)
    WeightState sh = make_weight_state(2, 1, 0.5, 2.0);
    sh.lambda = {1.0};
    Estimates zero;
    zero.loss = {0.0, 0.0};
    zero.cons = Mat(1, 2);
    const WeightState after = exp3sp_step(sh, Vec{0.5, 0.5}, zero);
    CHECK(after.log_weights[0] == doctest::Approx(after.log_weights[1]));
    CHECK(after.lambda[0] == doctest::Approx((1.0 - 2.0 * 0.25) * 1.0));
}

TEST_CASE("weight ratio halves under a unit loss estimate at mu = ln 2") {
    WeightState st = make_weight_state(2, 1, std::log(2.0), 1.0);
    Estimates est;
    est.loss = {1.0, 0.0};
    est.cons = Mat(1, 2);
    const WeightState next = exp3sp_step(st, Vec{0.5, 0.5}, est);
    const double ratio = std::exp(next.log_weights[0] - next.log_weights[1]);
    CHECK(ratio == doctest::Approx(0.5));
}

TEST_CASE("weight update commutes with arm relabeling") {
    WeightState st = make_weight_state(3, 2, 0.2, 1.5);
    st.log_weights = {0.3, -0.1, 0.4};
    st.lambda = {0.5, 0.1};
    const Vec p{0.2, 0.3, 0.5};
    Estimates est;
    est.loss = {0.0, 2.0, 0.0};
    est.cons = Mat(2, 3);
    est.cons(0, 1) = 1.0;
    est.cons(1, 1) = -0.5;
    const WeightState plain = exp3sp_step(st, p, est);

    // permutation (0 1 2) -> (2 0 1)
    const std::size_t perm[3] = {2, 0, 1};
    WeightState pst = st;
    Estimates pest;
    pest.loss.assign(3, 0.0);
    pest.cons = Mat(2, 3);
    Vec pp(3);
    for (std::size_t k = 0; k < 3; ++k) {
        pst.log_weights[perm[k]] = st.log_weights[k];
        pest.loss[perm[k]] = est.loss[k];
        pp[perm[k]] = p[k];
        for (std::size_t n = 0; n < 2; ++n) pest.cons(n, perm[k]) = est.cons(n, k);
    }
    const WeightState permuted = exp3sp_step(pst, pp, pest);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(permuted.log_weights[perm[k]] == doctest::Approx(plain.log_weights[k]));
    for (std::size_t n = 0; n < 2; ++n)
        CHECK(permuted.lambda[n] == doctest::Approx(plain.lambda[n]));
}

namespace {
env::ArmEnv stationary_env(Vec loss, Vec g_row, env::AvailabilityKind kind, double rate,
                           std::uint64_t seed) {
    std::vector<Vec> arms;
    for (std::size_t k = 0; k < loss.size(); ++k) arms.push_back(Vec{static_cast<double>(k)});
    Mat g(1, loss.size());
    for (std::size_t k = 0; k < loss.size(); ++k) g(0, k) = g_row[k];
    env::ArmAvailability avail;
    avail.kind = kind;
    avail.rate = rate;
    return env::ArmEnv(std::move(arms), std::move(loss), std::move(g), avail, seed);
}
}  // namespace

TEST_CASE("run_exp3sp degenerate and deterministic cases") {
    {
        env::ArmEnv env = stationary_env(Vec{0.4}, Vec{-0.1}, env::AvailabilityKind::Always, 1.0, 5);
        ArmSet arms{env.arms()};
        Exp3Config cfg;
        const RunTrace t = run_exp3sp(env, arms, cfg, 50, RngStream(5, 103));
        for (const auto& row : t.rows) CHECK(row.arm == 0);
        // single arm: zero regret against the only fixed distribution
        const Vec p = bench::best_fixed_distribution(Vec{0.4 * 50}, [] {
            Mat g(1, 1);
            g(0, 0) = -0.1 * 50;
            return g;
        }());
        CHECK(p[0] == doctest::Approx(1.0));
        double played = 0.0;
        for (const auto& row : t.rows) played += row.loss;
        CHECK(played - 50 * 0.4 == doctest::Approx(0.0));
    }
    {
        env::ArmEnv e1 =
            stationary_env(Vec{0.4, 0.2}, Vec{0.1, -0.1}, env::AvailabilityKind::IidBernoulli, 0.7, 9);
        env::ArmEnv e2 =
            stationary_env(Vec{0.4, 0.2}, Vec{0.1, -0.1}, env::AvailabilityKind::IidBernoulli, 0.7, 9);
        ArmSet arms{e1.arms()};
        Exp3Config cfg;
        const RunTrace t1 = run_exp3sp(e1, arms, cfg, 400, RngStream(9, 103));
        const RunTrace t2 = run_exp3sp(e2, arms, cfg, 400, RngStream(9, 103));
        REQUIRE(t1.rows.size() == t2.rows.size());
        for (std::size_t i = 0; i < t1.rows.size(); ++i) {
            CHECK(t1.rows[i].arm == t2.rows[i].arm);
            CHECK(t1.rows[i].loss == t2.rows[i].loss);
        }
        CHECK_THROWS_AS(run_exp3sp(e1, arms, cfg, 0, RngStream(9, 103)), std::invalid_argument);
    }
}

TEST_CASE("play frequencies concentrate on the cheapest feasible arm") {
    // arm 0 is cheapest but violates; arm 1 is the best feasible choice
    env::ArmEnv env = stationary_env(Vec{0.1, 0.3, 0.6, 0.9}, Vec{0.5, -0.2, -0.1, -0.3},
                                     env::AvailabilityKind::IidBernoulli, 0.85, 31);
    ArmSet arms{env.arms()};
    Exp3Config cfg;
    const long T = 30000;
    const RunTrace t = run_exp3sp(env, arms, cfg, T, RngStream(31, 103));

    // enumeration oracle over single feasible arms
    std::size_t best_feasible = 1;  // f = 0.3 among g <= 0 arms {1, 2, 3}
    std::vector<long> counts(4, 0);
    for (std::size_t i = t.rows.size() / 2; i < t.rows.size(); ++i) ++counts[t.rows[i].arm];
    const long max_count = *std::max_element(counts.begin(), counts.end());
    CHECK(counts[best_feasible] == max_count);
    CHECK(static_cast<double>(counts[best_feasible]) >=
          0.4 * static_cast<double>(t.rows.size() / 2));
}

TEST_CASE("distribution validity and multiplier bound hold along a run") {
    env::ArmEnv env = stationary_env(Vec{0.2, 0.5, 0.8}, Vec{0.6, -0.3, 0.2},
                                     env::AvailabilityKind::IidBernoulli, 0.6, 13);
    const std::size_t K = env.n_arms();
    WeightState st = make_weight_state(K, 1, 0.02, 1.0);
    RngStream rng(13, 103);
    const double bound = lambda_bound(0.0, env.g_max(), st.mu, st.delta_reg);
    for (int t = 0; t < 20000; ++t) {
        const auto mask = env.next_mask();
        const Vec p = restrict_distribution(st, mask);
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            CHECK(p[k] >= 0.0);
            if (!mask[k]) CHECK(p[k] == 0.0);
            sum += p[k];
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        // sample and update
        double u = rng.uniform01(), acc = 0.0;
        std::size_t k = 0;
        for (std::size_t a = 0; a < K; ++a) {
            if (p[a] <= 0) continue;
            acc += p[a];
            k = a;
            if (u < acc) break;
        }
        const Estimates est = importance_estimates(p, k, env.arm_loss(k), env.arm_constraints(k));
        st = exp3sp_step(st, p, est);
        for (double lam : st.lambda) {
            CHECK(lam >= 0.0);
            CHECK(lam <= bound);
        }
    }
}
