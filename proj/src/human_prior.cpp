#include "powergame/human_prior.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include "linear.hpp"
#include "powergame/policy.hpp"

namespace pg {

HumanPrior make_prior_layout(const Game& game) {
    HumanPrior p;
    const int S = game.num_states(), H = game.num_humans();
    p.num_states = S;
    p.num_humans = H;
    p.goal_offset = game.goal_offset;
    p.action_offset.assign(H, std::vector<std::size_t>(S + 1, 0));
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) p.action_offset[h][s + 1] = p.action_offset[h][s] + game.num_human(s, h);
    p.q_m.resize(game.total_goals());
    p.pi_h.resize(game.total_goals());
    for (int h = 0; h < H; ++h)
        for (int g = 0; g < game.num_goals(h); ++g) {
            p.q_m[p.flat(h, g)].assign(p.action_offset[h][S], 0.0);
            p.pi_h[p.flat(h, g)].assign(p.action_offset[h][S], 0.0);
        }
    p.v_m.assign(static_cast<std::size_t>(game.total_goals()) * S, 0.0);
    return p;
}

std::vector<double> default_schedule(int steps) {
    std::vector<double> t{0.0};
    for (int k = steps - 1; k >= 0; --k) t.push_back(std::ldexp(1.0, -k));
    return t;
}

namespace {

// Everything needed to evaluate eq. (1)-(3) for a single (h, g) pair.
struct Pair {
    const Game& game;
    int h, g;
    AdversaryModel adv;
    const std::vector<std::size_t>& off;
    std::vector<std::vector<int>> own;      // [s][profile] -> own action
    std::vector<std::vector<double>> muw;   // [s][profile] -> prob of others' actions
    std::vector<std::vector<int>> sigma;    // [s][profile] -> minimizing robot action
    bool discontinuous = true;              // no finite beta anywhere
    double beta_max = 0.0;

    Pair(const Game& gm, int h_, int g_, AdversaryModel a, const std::vector<std::size_t>& o)
        : game(gm), h(h_), g(g_), adv(a), off(o) {
        const int S = game.num_states(), H = game.num_humans();
        own.resize(S);
        muw.resize(S);
        std::vector<int> ah(H);
        for (int s = 0; s < S; ++s) {
            const auto& b = game.behavior_at(s, h, g);
            if (std::isfinite(b.beta) && b.nu < 1 && game.num_human(s, h) > 1 && !game.terminal[s]) {
                discontinuous = false;
                beta_max = std::max(beta_max, b.beta);
            }
            std::size_t P = game.human_profiles(s);
            own[s].resize(P);
            muw[s].resize(P);
            for (std::size_t p = 0; p < P; ++p) {
                game.decode_profile(s, p, ah.data());
                own[s][p] = ah[h];
                double w = 1.0;
                for (int o = 0; o < H; ++o) {
                    if (o == h) continue;
                    int n = game.num_human(s, o);
                    bool given = !b.mu.empty() && !b.mu[o].empty();
                    w *= given ? b.mu[o][ah[o]] : 1.0 / n;
                }
                muw[s][p] = w;
            }
        }
    }

    double backup(int s2, std::span<const double> v) const { return prior_backup(game, h, g, s2, v[s2]); }

    double robot_value(int s, int ar, std::size_t p, std::span<const double> v) const {
        double acc = 0;
        for (auto& t : game.row(s, ar * game.human_profiles(s) + p)) acc += t.prob * backup(t.next, v);
        return acc;
    }

    void q_state(int s, std::span<const double> v, double* q) const {
        const int n = game.num_human(s, h);
        if (game.terminal[s]) {
            for (int a = 0; a < n; ++a) q[a] = game.member(h, g, s) ? 1.0 : 0.0;
            return;
        }
        std::fill(q, q + n, 0.0);
        const int R = game.num_robot(s);
        const std::size_t P = game.human_profiles(s);
        for (std::size_t p = 0; p < P; ++p) {
            if (muw[s][p] == 0) continue;
            double best;
            if (adv == AdversaryModel::min) {
                best = kInf;
                for (int ar = 0; ar < R; ++ar) best = std::min(best, robot_value(s, ar, p, v));
            } else {
                best = 0;
                for (int ar = 0; ar < R; ++ar) best += robot_value(s, ar, p, v);
                best /= R;
            }
            q[own[s][p]] += muw[s][p] * best;
        }
    }

    void q_all(std::span<const double> v, std::vector<double>& q) const {
        for (int s = 0; s < game.num_states(); ++s) q_state(s, v, q.data() + off[s]);
    }

    void pi_state(int s, const double* q, double t, double* out) const {
        const int n = game.num_human(s, h);
        if (game.terminal[s] || n == 1) {
            std::fill(out, out + n, 1.0 / n);
            return;
        }
        const auto& b = game.behavior_at(s, h, g);
        double beta = std::isinf(b.beta) ? kInf : t * b.beta;
        softmax_policy({q, static_cast<std::size_t>(n)}, beta, {out, static_cast<std::size_t>(n)});
        if (b.nu > 0)
            for (int a = 0; a < n; ++a) out[a] = b.nu * (b.pi0.empty() ? 1.0 / n : b.pi0[a]) + (1 - b.nu) * out[a];
    }

    void pi_all(const std::vector<double>& q, double t, std::vector<double>& pi) const {
        for (int s = 0; s < game.num_states(); ++s) pi_state(s, q.data() + off[s], t, pi.data() + off[s]);
    }

    // greedy minimizing robot choices; keeps the old choice on ties
    bool improve(std::span<const double> v) {
        bool changed = false;
        const int S = game.num_states();
        if (sigma.empty()) {
            sigma.resize(S);
            for (int s = 0; s < S; ++s) sigma[s].assign(game.human_profiles(s), -1);
        }
        for (int s = 0; s < S; ++s) {
            if (game.terminal[s]) continue;
            const int R = game.num_robot(s);
            for (std::size_t p = 0; p < sigma[s].size(); ++p) {
                int best_a = 0;
                double best = kInf;
                for (int ar = 0; ar < R; ++ar) {
                    double x = robot_value(s, ar, p, v);
                    if (x < best) best = x, best_a = ar;
                }
                int old = sigma[s][p];
                if (old >= 0 && robot_value(s, old, p, v) <= best + 1e-12 * std::max(1.0, std::abs(best))) continue;
                sigma[s][p] = best_a;
                changed = true;
            }
        }
        return changed;
    }

    std::vector<double> evaluate_fixed(const std::vector<double>& pi) const {
        const int S = game.num_states();
        detail::Triplets m;
        std::vector<double> b(S, 0.0);
        const double gam = game.gamma_h[h];
        for (int s = 0; s < S; ++s) {
            if (game.terminal[s]) {
                b[s] = game.member(h, g, s) ? 1.0 : 0.0;
                continue;
            }
            const int R = game.num_robot(s);
            const std::size_t P = game.human_profiles(s);
            for (std::size_t p = 0; p < P; ++p) {
                double w = pi[off[s] + own[s][p]] * muw[s][p];
                if (w == 0) continue;
                auto add_row = [&](int ar, double wr) {
                    for (auto& t : game.row(s, ar * P + p)) {
                        double c = w * wr * t.prob;
                        if (game.member(h, g, t.next)) b[s] += c;
                        if (!goal_absorbs(game, h, g, t.next)) m.emplace_back(s, t.next, c * gam);
                    }
                };
                if (adv == AdversaryModel::min) add_row(sigma[s][p], 1.0);
                else
                    for (int ar = 0; ar < R; ++ar) add_row(ar, 1.0 / R);
            }
        }
        return detail::solve_i_minus(S, m, b);
    }

    // value of pi against the worst-case robot (policy iteration over the robot's choices)
    std::vector<double> robust_eval(const std::vector<double>& pi, std::span<const double> v0) {
        if (adv == AdversaryModel::mean) return evaluate_fixed(pi);
        if (sigma.empty()) improve(v0);
        std::vector<double> v;
        for (int it = 0; it < 1000; ++it) {
            v = evaluate_fixed(pi);
            if (!improve(v)) return v;
        }
        return v;
    }
};

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

struct PairResult {
    std::vector<double> v, q, pi;
    double residual = 0;
    std::vector<FoldReport> folds;
};

void finish_pair(Pair& pr, PairResult& r, double t) {
    const int S = pr.game.num_states();
    r.q.assign(pr.off[S], 0.0);
    r.pi.assign(pr.off[S], 0.0);
    pr.q_all(r.v, r.q);
    pr.pi_all(r.q, t, r.pi);
    for (int s = 0; s < S; ++s) {
        double acc = 0;
        for (std::size_t i = pr.off[s]; i < pr.off[s + 1]; ++i) acc += r.pi[i] * r.q[i];
        r.v[s] = acc;
    }
}

PairResult backward_pair(const Game& game, int h, int g, const PriorOptions& opt,
                         const std::vector<std::size_t>& off, const std::vector<int>& order) {
    Pair pr(game, h, g, opt.adversary, off);
    PairResult r;
    const int S = game.num_states();
    r.v.assign(S, 0.0);
    r.q.assign(off[S], 0.0);
    r.pi.assign(off[S], 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int s = *it;
        pr.q_state(s, r.v, r.q.data() + off[s]);
        pr.pi_state(s, r.q.data() + off[s], 1.0, r.pi.data() + off[s]);
        double acc = 0;
        for (std::size_t i = off[s]; i < off[s + 1]; ++i) acc += r.pi[i] * r.q[i];
        r.v[s] = acc;
    }
    return r;
}

// converges the damped map at continuation parameter t starting from v
bool converge_at(Pair& pr, const PriorOptions& opt, double t, std::vector<double>& v, double& res, bool first) {
    const int S = pr.game.num_states();
    std::vector<double> q(pr.off[S]), pi(pr.off[S]), vn(S);
    double lam = pr.discontinuous ? 1.0 : opt.damping;
    for (long it = 0; it < opt.max_iter; ++it) {
        pr.q_all(v, q);
        pr.pi_all(q, t, pi);
        if (opt.map == FixedPointMap::evaluate) {
            vn = pr.robust_eval(pi, v);
        } else {
            for (int s = 0; s < S; ++s) {
                double acc = 0;
                for (std::size_t i = pr.off[s]; i < pr.off[s + 1]; ++i) acc += pi[i] * q[i];
                vn[s] = acc;
            }
        }
        res = max_diff(vn, v);
        if (res <= opt.tol * std::max(1.0, max_abs(v))) {
            v = vn;
            return true;
        }
        double l = (first && it == 0) ? 1.0 : lam;
        for (int s = 0; s < S; ++s) v[s] = (1 - l) * v[s] + l * vn[s];
    }
    return false;
}

PairResult fixed_point_pair(const Game& game, int h, int g, const PriorOptions& opt,
                            const std::vector<std::size_t>& off, const std::vector<double>& sched) {
    Pair pr(game, h, g, opt.adversary, off);
    PairResult r;
    const int S = game.num_states();
    r.v.assign(S, 0.0);
    for (int s = 0; s < S; ++s)
        if (game.terminal[s] && game.member(h, g, s)) r.v[s] = 1.0;
    std::vector<double> prev;
    double tprev = 0;
    // a pair whose policies never depend on beta needs only the last schedule point
    std::vector<double> ts = pr.discontinuous ? std::vector<double>{1.0} : sched;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        double t = ts[k];
        double res = 0;
        if (!converge_at(pr, opt, t, r.v, res, k == 0))
            throw ConvergenceError("prior fixed point did not converge for " + game.human_names[h] + "/" +
                                       game.goals[h][g].name,
                                   t * pr.beta_max, res);
        r.residual = std::max(r.residual, res);
        if (k > 0 && opt.detect_folds && max_diff(r.v, prev) > opt.fold_jump) {
            // bisect for the location of the jump
            double lo = tprev, hi = t;
            std::vector<double> vlo = prev, vhi = r.v;
            while (hi - lo > 1e-6 * hi) {
                double mid = 0.5 * (lo + hi);
                std::vector<double> vm = vlo;
                double rm = 0;
                if (!converge_at(pr, opt, mid, vm, rm, false)) break;
                if (max_diff(vm, vlo) > opt.fold_jump) hi = mid, vhi = vm;
                else lo = mid, vlo = vm;
            }
            double jump = max_diff(vhi, vlo);
            if (jump > opt.fold_jump) r.folds.push_back({h, g, lo, lo * pr.beta_max, jump});
        }
        prev = r.v;
        tprev = t;
    }
    finish_pair(pr, r, 1.0);
    return r;
}

template <class F>
HumanPrior run_pairs(const Game& game, const PriorOptions& opt, F&& solve) {
    HumanPrior out = make_prior_layout(game);
    const int S = game.num_states();
    std::vector<std::pair<int, int>> pairs;
    for (int h = 0; h < game.num_humans(); ++h)
        for (int g = 0; g < game.num_goals(h); ++g) pairs.emplace_back(h, g);
    std::vector<PairResult> res(pairs.size());
    std::exception_ptr err;
    std::mutex mu;
    const long n = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(dynamic) if (opt.exec == ExecPolicy::parallel)
    for (long i = 0; i < n; ++i) {
        try {
            res[i] = solve(pairs[i].first, pairs[i].second, out.action_offset[pairs[i].first]);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto [h, g] = pairs[i];
        int f = out.flat(h, g);
        out.q_m[f] = std::move(res[i].q);
        out.pi_h[f] = std::move(res[i].pi);
        std::copy(res[i].v.begin(), res[i].v.end(), out.v_m.begin() + static_cast<std::size_t>(f) * S);
        out.residual = std::max(out.residual, res[i].residual);
        out.folds.insert(out.folds.end(), res[i].folds.begin(), res[i].folds.end());
    }
    return out;
}

}  // namespace

void prior_q_from_v(const Game& game, int h, int g, std::span<const double> v, AdversaryModel adv,
                    const std::vector<std::size_t>& action_offset, std::vector<double>& q) {
    Pair pr(game, h, g, adv, action_offset);
    q.assign(action_offset[game.num_states()], 0.0);
    pr.q_all(v, q);
}

HumanPrior solve_prior_backward(const Game& game, const PriorOptions& opt) {
    auto order = is_acyclic(game);
    if (!order) throw Error(ErrorKind::argument, "backward induction needs an acyclic game");
    return run_pairs(game, opt, [&](int h, int g, const std::vector<std::size_t>& off) {
        return backward_pair(game, h, g, opt, off, *order);
    });
}

HumanPrior solve_prior_fixed_point(const Game& game, const PriorOptions& opt) {
    std::vector<double> sched = opt.beta_schedule.empty() ? default_schedule(opt.schedule_steps) : opt.beta_schedule;
    if (sched.empty() || sched.front() != 0.0 || sched.back() != 1.0 || !std::is_sorted(sched.begin(), sched.end()))
        throw Error(ErrorKind::argument, "beta schedule must rise from 0 to 1");
    return run_pairs(game, opt, [&](int h, int g, const std::vector<std::size_t>& off) {
        return fixed_point_pair(game, h, g, opt, off, sched);
    });
}

}  // namespace pg
