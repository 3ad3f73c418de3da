#include "fogopt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace fogopt::bench {

namespace {

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_dense(Mat a, Vec b, Vec& out) {
    const std::size_t n = a.rows;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (std::abs(a(piv, col)) < 1e-13) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double m = a(r, col) / a(col, col);
            if (m == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= m * a(col, c);
            b[r] -= m * b[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a(ri, c) * out[c];
        out[ri] = acc / a(ri, ri);
    }
    return true;
}

// Dual view of one slot: exact (or inner-loop) primal argmin per price vector.
struct DualView {
    std::function<Vec(const Vec&)> argmin;          // x*(lambda)
    std::function<Vec(const Vec&)> constraints_at;  // g(x)
    std::function<Mat(const Vec&, const Vec&)> curvature;  // H(lambda, x*)
    double lipschitz = 1.0;  // bound on the dual gradient's Lipschitz constant
    std::size_t n = 0;
};

double comp_residual(const Vec& lambda, const Vec& r) {
    double phi = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i)
        phi = std::max(phi, std::abs(std::min(lambda[i], -r[i])));
    return phi;
}

// Maximize the dual via safeguarded semismooth Newton; projected gradient
// ascent steps keep global progress when Newton stalls.
Vec solve_dual(const DualView& view, double tol, Vec lambda) {
    if (lambda.size() != view.n) lambda.assign(view.n, 0.0);
    const double step = 1.0 / std::max(view.lipschitz, 1e-12);
    Vec x = view.argmin(lambda);
    Vec r = view.constraints_at(x);
    double phi = comp_residual(lambda, r);
    for (int round = 0; round < 400 && phi > tol; ++round) {
        bool newton_ok = false;
        std::vector<std::size_t> act;
        for (std::size_t i = 0; i < view.n; ++i)
            if (lambda[i] > 0.0 || r[i] > 0.0) act.push_back(i);
        if (!act.empty()) {
            const Mat h_full = view.curvature(lambda, x);
            Mat h(act.size(), act.size());
            Vec rhs(act.size());
            for (std::size_t i = 0; i < act.size(); ++i) {
                rhs[i] = r[act[i]];
                for (std::size_t j = 0; j < act.size(); ++j)
                    h(i, j) = h_full(act[i], act[j]) + (i == j ? 1e-12 : 0.0);
            }
            Vec dl;
            if (solve_dense(h, rhs, dl)) {
                // cap the step; a degenerate curvature block (all primal
                // coordinates clamped) would otherwise launch the multiplier
                const double cap = 10.0 * (1.0 + core::norm_inf(lambda));
                for (auto& v : dl) v = std::min(std::max(v, -cap), cap);
                for (double scale : {1.0, 0.5, 0.25, 0.125}) {
                    Vec trial(view.n, 0.0);
                    for (std::size_t i = 0; i < act.size(); ++i)
                        trial[act[i]] = std::max(lambda[act[i]] + scale * dl[i], 0.0);
                    Vec xt = view.argmin(trial);
                    Vec rt = view.constraints_at(xt);
                    const double phit = comp_residual(trial, rt);
                    if (phit <= 0.9 * phi) {
                        lambda = std::move(trial);
                        x = std::move(xt);
                        r = std::move(rt);
                        phi = phit;
                        newton_ok = true;
                        break;
                    }
                }
            }
        }
        if (!newton_ok) {
            for (int k = 0; k < 25 && phi > tol; ++k) {
                for (std::size_t i = 0; i < view.n; ++i)
                    lambda[i] = std::max(lambda[i] + step * r[i], 0.0);
                x = view.argmin(lambda);
                r = view.constraints_at(x);
                phi = comp_residual(lambda, r);
            }
        }
        if (core::norm_inf(lambda) > 1e9)
            throw std::runtime_error("clairvoyant_slot: infeasible slot (unbounded multiplier)");
    }
    if (phi > tol) {
        // long gradient phase before giving up
        for (long k = 0; k < 2000000 && phi > tol; ++k) {
            for (std::size_t i = 0; i < view.n; ++i)
                lambda[i] = std::max(lambda[i] + step * r[i], 0.0);
            x = view.argmin(lambda);
            r = view.constraints_at(x);
            phi = comp_residual(lambda, r);
            if (core::norm_inf(lambda) > 1e9)
                throw std::runtime_error("clairvoyant_slot: infeasible slot (unbounded multiplier)");
        }
        if (phi > tol) throw std::runtime_error("clairvoyant_slot: KKT tolerance not reached");
    }
    return lambda;
}

}  // namespace

Vec clairvoyant_slot(const SlotFunctions& slot_fns, const BoxSet& set, double tol,
                     Vec* warm_lambda) {
    const Vec center = set.center();
    const Mat jac = slot_fns.constraint_jacobian(center);
    Vec offset = slot_fns.constraints(center);
    core::axpy(offset, -1.0, jac.mul(center));  // g(x) = J x + offset for affine g
    const std::size_t n = jac.rows;

    DualView view;
    view.n = n;
    view.constraints_at = [&](const Vec& x) { return slot_fns.constraints(x); };

    if (slot_fns.quadratic_form()) {
        const auto& qf = *slot_fns.quadratic_form();
        double qmin = std::numeric_limits<double>::infinity();
        for (double q : qf.quad) qmin = std::min(qmin, q);
        double fro2 = 0.0;
        for (double v : jac.data) fro2 += v * v;
        view.lipschitz = qmin > 0.0 ? fro2 / (2.0 * qmin) : fro2 * 1e6;
        view.argmin = [&set, &jac, &qf](const Vec& lambda) {
            const Vec jtl = jac.tmul(lambda);
            Vec x(set.dim());
            for (std::size_t i = 0; i < set.dim(); ++i) {
                const double slope = qf.lin[i] + jtl[i];
                double xi = qf.quad[i] > 0.0 ? -slope / (2.0 * qf.quad[i])
                                             : (slope > 0.0 ? set.lower[i] : set.upper[i]);
                x[i] = std::min(std::max(xi, set.lower[i]), set.upper[i]);
            }
            return x;
        };
        view.curvature = [&set, &jac, &qf](const Vec&, const Vec& x) {
            Mat h(jac.rows, jac.rows);
            for (std::size_t i = 0; i < set.dim(); ++i) {
                if (qf.quad[i] <= 0.0) continue;
                if (x[i] <= set.lower[i] + 1e-12 || x[i] >= set.upper[i] - 1e-12) continue;
                const double d = 1.0 / (2.0 * qf.quad[i]);
                for (std::size_t a = 0; a < jac.rows; ++a) {
                    if (jac(a, i) == 0.0) continue;
                    for (std::size_t b = 0; b < jac.rows; ++b)
                        h(a, b) += jac(a, i) * d * jac(b, i);
                }
            }
            return h;
        };
    } else {
        // black-box loss: inner projected gradient descent with an estimated
        // smoothness constant
        double l_f = 1e-6;
        {
            Vec a = set.lower, b = set.upper;
            const Vec ga = slot_fns.oracle_loss_gradient(a);
            const Vec gb = slot_fns.oracle_loss_gradient(b);
            const double dist = std::max(core::norm2(core::sub(b, a)), 1e-12);
            l_f = std::max(l_f, core::norm2(core::sub(gb, ga)) / dist);
            const Vec gc = slot_fns.oracle_loss_gradient(center);
            l_f = std::max(l_f, 2.0 * core::norm2(core::sub(gc, ga)) / dist);
        }
        l_f *= 4.0;
        const double inner_tol = tol * 1e-3;
        auto inner = [&, l_f, inner_tol](const Vec& lambda) {
            Vec x = center;
            const Vec jtl = jac.tmul(lambda);
            for (long it = 0; it < 200000; ++it) {
                Vec grad = slot_fns.oracle_loss_gradient(x);
                core::axpy(grad, 1.0, jtl);
                double move = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    const double next = std::min(
                        std::max(x[i] - grad[i] / l_f, set.lower[i]), set.upper[i]);
                    move = std::max(move, std::abs(next - x[i]));
                    x[i] = next;
                }
                if (move < inner_tol) break;
            }
            return x;
        };
        view.argmin = inner;
        double fro2 = 0.0;
        for (double v : jac.data) fro2 += v * v;
        view.lipschitz = fro2 / std::max(l_f / 8.0, 1e-9);
        view.curvature = [&, inner](const Vec& lambda, const Vec& x) {
            // finite-difference curvature of the dual gradient map
            const double h_fd = 1e-6;
            const Vec r0 = slot_fns.constraints(x);
            Mat h(n, n);
            for (std::size_t j = 0; j < n; ++j) {
                Vec lp = lambda;
                lp[j] += h_fd;
                const Vec rp = slot_fns.constraints(inner(lp));
                for (std::size_t i = 0; i < n; ++i) h(i, j) = (r0[i] - rp[i]) / h_fd;
            }
            // symmetrize
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double v = 0.5 * (h(i, j) + h(j, i));
                    h(i, j) = v;
                    h(j, i) = v;
                }
            return h;
        };
    }

    Vec lambda0 = warm_lambda && warm_lambda->size() == n ? *warm_lambda : Vec(n, 0.0);
    Vec lambda = solve_dual(view, tol, std::move(lambda0));
    if (warm_lambda) *warm_lambda = lambda;
    return view.argmin(lambda);
}

double dynamic_regret(const RunTrace& trace, const Comparator& comp) {
    if (trace.rows.size() != comp.optimal_losses.size())
        throw std::invalid_argument("dynamic_regret: length mismatch");
    double played = 0.0;
    for (const auto& r : trace.rows) played += r.loss;
    double best = 0.0;
    for (double v : comp.optimal_losses) best += v;
    return played - best;
}

double dynamic_fit(const RunTrace& trace) {
    if (trace.rows.empty()) return 0.0;
    Vec sum(trace.rows.front().constraint.size(), 0.0);
    for (const auto& r : trace.rows) core::axpy(sum, 1.0, r.constraint);
    return core::norm2(core::positive_part(sum));
}

SlopeEstimate slope_estimate(const std::vector<long>& horizons, const Vec& values) {
    if (horizons.size() != values.size())
        throw std::invalid_argument("slope_estimate: length mismatch");
    Vec lx, ly;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] > 0.0) {
            lx.push_back(std::log(static_cast<double>(horizons[i])));
            ly.push_back(std::log(values[i]));
        }
    }
    SlopeEstimate est;
    est.n_used = lx.size();
    if (lx.empty()) {
        est.all_excluded = true;
        return est;
    }
    if (lx.size() < 4) throw std::invalid_argument("slope_estimate: fewer than 4 positive points");
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    est.slope = sxy / sxx;
    est.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    if (lx.size() > 2) {
        const double ss_res = syy - est.slope * sxy;
        est.std_error = std::sqrt(std::max(ss_res, 0.0) / (n - 2.0) / sxx);
    }
    return est;
}

MetricReport metric_report(const RunTrace& trace, const Comparator& comp) {
    MetricReport rep = metric_report(trace);
    rep.path_variation = comp.path_variation;
    rep.regret_prefix.assign(trace.rows.size(), 0.0);
    double acc = 0.0;
    for (std::size_t t = 0; t < trace.rows.size(); ++t) {
        acc += trace.rows[t].loss - comp.optimal_losses[t];
        rep.regret_prefix[t] = acc;
    }
    rep.regret = acc;
    return rep;
}

MetricReport metric_report(const RunTrace& trace) {
    MetricReport rep;
    if (trace.rows.empty()) return rep;
    rep.fit_prefix.assign(trace.rows.size(), 0.0);
    Vec sum(trace.rows.front().constraint.size(), 0.0);
    for (std::size_t t = 0; t < trace.rows.size(); ++t) {
        core::axpy(sum, 1.0, trace.rows[t].constraint);
        rep.fit_prefix[t] = core::norm2(core::positive_part(sum));
    }
    rep.fit = rep.fit_prefix.back();
    return rep;
}

Comparator build_fog_comparator(env::FogOcoEnv& environment, long T, double tol) {
    Comparator comp;
    comp.optima.reserve(static_cast<std::size_t>(T));
    comp.optimal_losses.reserve(static_cast<std::size_t>(T));
    Vec warm;
    for (long t = 0; t < T; ++t) {
        env::SlotFunctions slot = environment.next();
        Vec x = clairvoyant_slot(slot, environment.box(), tol, &warm);
        if (!environment.box().contains(x, 1e-12))
            throw std::runtime_error("comparator: clairvoyant point left the box");
        const Vec g = slot.constraints(x);
        for (double v : g)
            if (v > 1e-6) throw std::runtime_error("comparator: infeasible clairvoyant point");
        comp.optimal_losses.push_back(slot.oracle_loss(x));
        if (t > 0) comp.path_variation += core::norm2(core::sub(x, comp.optima.back()));
        comp.optima.push_back(std::move(x));
    }
    return comp;
}

namespace {
void for_each_combination(std::size_t m, std::size_t r,
                          const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> idx(r);
    for (std::size_t i = 0; i < r; ++i) idx[i] = i;
    if (r > m) return;
    while (true) {
        fn(idx);
        std::size_t i = r;
        while (i-- > 0) {
            if (idx[i] != i + m - r) {
                ++idx[i];
                for (std::size_t j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
                break;
            }
            if (i == 0) return;
        }
        if (r == 0) return;
    }
}
}  // namespace

Vec best_fixed_distribution(const Vec& f_sum, const Mat& g_sum) {
    const std::size_t K = f_sum.size();
    const std::size_t N = g_sum.rows;
    if (g_sum.cols != K) throw std::invalid_argument("best_fixed_distribution: shape mismatch");
    if (K == 0) throw std::invalid_argument("best_fixed_distribution: no arms");
    if (K > 16) throw std::invalid_argument("best_fixed_distribution: exact enumeration capped at 16 arms");
    const double feas_tol = 1e-9 * std::max(1.0, core::norm_inf(Vec(g_sum.data)));

    double best_val = std::numeric_limits<double>::infinity();
    Vec best_p;
    auto consider = [&](const Vec& p) {
        for (double v : p)
            if (v < -1e-9) return;
        Vec gp = g_sum.mul(p);
        for (double v : gp)
            if (v > feas_tol) return;
        const double val = core::dot(f_sum, p);
        if (val < best_val) {
            best_val = val;
            best_p = p;
            for (auto& v : best_p) v = std::max(v, 0.0);
        }
    };

    if (K == 1) {
        consider(Vec{1.0});
    } else {
        // a vertex activates K-1 constraints from {p_k = 0} and {row g_n p = 0}
        // alongside the simplex equality
        for_each_combination(K + N, K - 1, [&](const std::vector<std::size_t>& chosen) {
            Mat a(K, K);
            Vec b(K, 0.0);
            for (std::size_t c = 0; c < K; ++c) a(0, c) = 1.0;
            b[0] = 1.0;
            for (std::size_t i = 0; i < chosen.size(); ++i) {
                const std::size_t pick = chosen[i];
                if (pick < K) {
                    a(i + 1, pick) = 1.0;  // p_pick = 0
                } else {
                    const std::size_t row = pick - K;
                    for (std::size_t c = 0; c < K; ++c) a(i + 1, c) = g_sum(row, c);
                }
            }
            Vec p;
            if (solve_dense(std::move(a), std::move(b), p)) consider(p);
        });
    }
    if (best_p.empty())
        throw std::runtime_error("best_fixed_distribution: no feasible fixed distribution");
    // clean tiny negatives and renormalize
    double z = 0.0;
    for (double v : best_p) z += v;
    for (auto& v : best_p) v /= z;
    return best_p;
}

}  // namespace fogopt::bench
