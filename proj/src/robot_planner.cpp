#include "powergame/robot_planner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include "linear.hpp"
#include "powergame/policy.hpp"

namespace pg {

RobotSolution make_robot_layout(const Game& game) {
    RobotSolution r;
    const int S = game.num_states(), H = game.num_humans();
    r.num_states = S;
    r.num_humans = H;
    r.goal_offset = game.goal_offset;
    r.robot_offset.assign(S + 1, 0);
    for (int s = 0; s < S; ++s) r.robot_offset[s + 1] = r.robot_offset[s] + game.num_robot(s);
    r.q_r.assign(r.robot_offset[S], 0.0);
    r.pi_r.assign(r.robot_offset[S], 0.0);
    r.v_e.assign(static_cast<std::size_t>(game.total_goals()) * S, 0.0);
    r.x_h.assign(static_cast<std::size_t>(H) * S, 0.0);
    r.u_r.assign(S, 0.0);
    r.v_r.assign(S, 0.0);
    return r;
}

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct Core {
    const Game& game;
    const HumanPrior& prior;
    const PowerParams& par;
    const RobotOptions& opt;
    int S, H;
    std::vector<std::size_t> roff;
    std::vector<std::vector<int>> prof;       // [s][p * H + h]
    std::vector<std::vector<double>> pibar;   // [h][action_offset[h][s] + a]
    std::vector<std::vector<double>> wbar;    // [s][p]

    Core(const Game& g, const HumanPrior& pr, const PowerParams& p, const RobotOptions& o)
        : game(g), prior(pr), par(p), opt(o), S(g.num_states()), H(g.num_humans()) {
        if (prior.num_states != S || prior.num_humans != H || prior.goal_offset != game.goal_offset)
            throw Error(ErrorKind::argument, "prior does not belong to this game");
        for (int h = 0; h < H; ++h)
            if (prior.action_offset[h].size() != static_cast<std::size_t>(S) + 1 ||
                prior.action_offset[h][S] != prior.q_m[prior.flat(h, 0)].size())
                throw Error(ErrorKind::argument, "prior tables do not match the game's action sets");
        roff.assign(S + 1, 0);
        for (int s = 0; s < S; ++s) roff[s + 1] = roff[s] + game.num_robot(s);
        prof.resize(S);
        for (int s = 0; s < S; ++s) {
            std::size_t P = game.human_profiles(s);
            prof[s].resize(P * H);
            for (std::size_t q = 0; q < P; ++q) game.decode_profile(s, q, prof[s].data() + q * H);
        }
        pibar.resize(H);
        for (int h = 0; h < H; ++h) {
            const auto& off = prior.action_offset[h];
            pibar[h].assign(off[S], 0.0);
            int G = game.num_goals(h);
            for (int g = 0; g < G; ++g) {
                const auto& pi = prior.pi_h[prior.flat(h, g)];
                for (std::size_t i = 0; i < off[S]; ++i) pibar[h][i] += pi[i] / G;
            }
        }
        wbar.resize(S);
        for (int s = 0; s < S; ++s) {
            std::size_t P = game.human_profiles(s);
            wbar[s].assign(P, 0.0);
            if (opt.enumerate_goals) enumerate_weights(s);
            else
                for (std::size_t q = 0; q < P; ++q) {
                    double w = 1;
                    for (int h = 0; h < H; ++h) w *= pibar[h][prior.action_offset[h][s] + prof[s][q * H + h]];
                    wbar[s][q] = w;
                }
        }
    }

    void enumerate_weights(int s) {
        std::size_t total = 1;
        for (int h = 0; h < H; ++h) total *= game.num_goals(h);
        if (total > 10000) throw Error(ErrorKind::argument, "goal profile enumeration exceeds 1e4 profiles");
        std::vector<int> gp(H, 0);
        const std::size_t P = game.human_profiles(s);
        for (std::size_t k = 0; k < total; ++k) {
            std::size_t rem = k;
            for (int h = H - 1; h >= 0; --h) {
                gp[h] = static_cast<int>(rem % game.num_goals(h));
                rem /= game.num_goals(h);
            }
            for (std::size_t q = 0; q < P; ++q) {
                double w = 1;
                for (int h = 0; h < H; ++h) w *= prior.pi(h, gp[h], s)[prof[s][q * H + h]];
                wbar[s][q] += w / static_cast<double>(total);
            }
        }
    }

    // probability of profile q at s given h pursues goal g and the others are goal-averaged
    double w_hg(int s, std::size_t q, int h, int g) const {
        double w = 1;
        for (int o = 0; o < H; ++o) {
            int a = prof[s][q * H + o];
            w *= (o == h) ? prior.pi(h, g, s)[a] : pibar[o][prior.action_offset[o][s] + a];
        }
        return w;
    }

    // E_{a_H} E_{s'} V_r(s') per robot action
    void qtilde(int s, const std::vector<double>& vr, double* out) const {
        const std::size_t P = game.human_profiles(s);
        for (int ar = 0; ar < game.num_robot(s); ++ar) {
            double acc = 0;
            for (std::size_t q = 0; q < P; ++q) {
                if (wbar[s][q] == 0) continue;
                double inner = 0;
                for (auto& t : game.row(s, ar * P + q)) inner += t.prob * vr[t.next];
                acc += wbar[s][q] * inner;
            }
            out[ar] = acc;
        }
    }

    // Q_r row and policy at s; with gamma_r = 0 the policy is the gamma_r -> 0+ limit
    void q_and_pi(int s, const std::vector<double>& vr, double beta, double* q, double* pi) const {
        const int R = game.num_robot(s);
        std::vector<double> qt(R);
        qtilde(s, vr, qt.data());
        const double gr = game.gamma_r;
        for (int a = 0; a < R; ++a) q[a] = gr * qt[a];
        PowerParams p = par;
        p.beta_r = beta;
        std::span<const double> src = gr > 0 ? std::span<const double>(q, R) : std::span<const double>(qt);
        robot_policy(src, p, {pi, static_cast<std::size_t>(R)});
    }

    void terminal_row(int s, double u, double* q, double* pi, double& vr) const {
        const int R = game.num_robot(s);
        if (opt.terminal == TerminalReward::self_loop) {
            vr = u / (1 - game.gamma_r);
            for (int a = 0; a < R; ++a) q[a] = game.gamma_r * vr;
        } else {
            vr = u;
            for (int a = 0; a < R; ++a) q[a] = 0;
        }
        for (int a = 0; a < R; ++a) pi[a] = 1.0 / R;
    }

    double ve_backup(int h, int g, int s2, const double* ve_hg) const {
        return prior_backup(game, h, g, s2, ve_hg[s2]);
    }

    // one-step V^e(s, h, g) given successor values
    double ve_state(int s, int h, int g, const double* pi, const double* ve_hg) const {
        if (game.terminal[s]) return game.member(h, g, s) ? 1.0 : 0.0;
        const std::size_t P = game.human_profiles(s);
        double acc = 0;
        for (std::size_t q = 0; q < P; ++q) {
            double w = w_hg(s, q, h, g);
            if (w == 0) continue;
            for (int ar = 0; ar < game.num_robot(s); ++ar) {
                if (pi[ar] == 0) continue;
                double inner = 0;
                for (auto& t : game.row(s, ar * P + q)) inner += t.prob * ve_backup(h, g, t.next, ve_hg);
                acc += w * pi[ar] * inner;
            }
        }
        return acc;
    }

    std::vector<double> ve_solve(int h, int g, const std::vector<double>& pi_r) const {
        detail::Triplets m;
        std::vector<double> b(S, 0.0);
        const double gam = game.gamma_h[h];
        for (int s = 0; s < S; ++s) {
            if (game.terminal[s]) {
                b[s] = game.member(h, g, s) ? 1.0 : 0.0;
                continue;
            }
            const std::size_t P = game.human_profiles(s);
            for (std::size_t q = 0; q < P; ++q) {
                double w = w_hg(s, q, h, g);
                if (w == 0) continue;
                for (int ar = 0; ar < game.num_robot(s); ++ar) {
                    double pa = pi_r[roff[s] + ar];
                    if (pa == 0) continue;
                    for (auto& t : game.row(s, ar * P + q)) {
                        double c = w * pa * t.prob;
                        if (game.member(h, g, t.next)) b[s] += c;
                        if (!goal_absorbs(game, h, g, t.next)) m.emplace_back(s, t.next, c * gam);
                    }
                }
            }
        }
        return detail::solve_i_minus(S, m, b);
    }

    void ve_all(const std::vector<double>& pi_r, std::vector<double>& ve) const {
        const int G = game.total_goals();
        std::vector<std::pair<int, int>> pairs;
        for (int h = 0; h < H; ++h)
            for (int g = 0; g < game.num_goals(h); ++g) pairs.emplace_back(h, g);
        std::exception_ptr err;
        std::mutex mu;
#pragma omp parallel for schedule(dynamic) if (opt.exec == ExecPolicy::parallel)
        for (int i = 0; i < G; ++i) {
            try {
                auto v = ve_solve(pairs[i].first, pairs[i].second, pi_r);
                std::copy(v.begin(), v.end(), ve.begin() + static_cast<std::size_t>(i) * S);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
    }

    double x_of(int h, int s, const std::vector<double>& ve) const {
        if (game.has_x_override(h, s)) return game.x_override_at(h, s);
        double x = 0;
        for (int g = 0; g < game.num_goals(h); ++g) {
            double v = ve[static_cast<std::size_t>(game.goal_offset[h] + g) * S + s];
            if (v > 0) x += std::pow(v, par.zeta);
        }
        return x;
    }

    void x_u_state(int s, const std::vector<double>& ve, std::vector<double>& x, std::vector<double>& u) const {
        std::vector<double> xs(H);
        for (int h = 0; h < H; ++h) xs[h] = x[static_cast<std::size_t>(h) * S + s] = x_of(h, s, ve);
        u[s] = intrinsic_reward(xs, par);
    }

    std::vector<double> vr_solve(const std::vector<double>& pi_r, const std::vector<double>& u) const {
        detail::Triplets m;
        std::vector<double> b(S, 0.0);
        const double gr = game.gamma_r;
        for (int s = 0; s < S; ++s) {
            if (game.terminal[s]) {
                b[s] = opt.terminal == TerminalReward::self_loop ? u[s] / (1 - gr) : u[s];
                continue;
            }
            b[s] = u[s];
            if (gr == 0) continue;
            const std::size_t P = game.human_profiles(s);
            for (int ar = 0; ar < game.num_robot(s); ++ar) {
                double pa = pi_r[roff[s] + ar];
                if (pa == 0) continue;
                for (std::size_t q = 0; q < P; ++q) {
                    if (wbar[s][q] == 0) continue;
                    for (auto& t : game.row(s, ar * P + q)) m.emplace_back(s, t.next, gr * pa * wbar[s][q] * t.prob);
                }
            }
        }
        return detail::solve_i_minus(S, m, b);
    }

    void policy_all(const std::vector<double>& vr, double beta, std::vector<double>& q, std::vector<double>& pi) const {
        for (int s = 0; s < S; ++s) {
            if (game.terminal[s]) {
                const int R = game.num_robot(s);
                for (int a = 0; a < R; ++a) {
                    q[roff[s] + a] = opt.terminal == TerminalReward::self_loop ? game.gamma_r * vr[s] : 0.0;
                    pi[roff[s] + a] = 1.0 / R;
                }
                continue;
            }
            q_and_pi(s, vr, beta, q.data() + roff[s], pi.data() + roff[s]);
        }
    }

    void check_q(const RobotSolution& r) const {
        if (opt.terminal != TerminalReward::self_loop || game.gamma_r == 0) return;
        for (double q : r.q_r)
            if (!(q < 0)) throw Error(ErrorKind::convergence, "Q_r must stay strictly negative");
    }
};

double scaled_beta(double beta_r, double t) { return std::isinf(beta_r) ? (t > 0 ? kInf : 0.0) : t * beta_r; }

}  // namespace

RobotSolution solve_robot_backward(const Game& game, const HumanPrior& prior, const PowerParams& params,
                                   const RobotOptions& opt) {
    check_params(params);
    auto order = is_acyclic(game);
    if (!order) throw Error(ErrorKind::argument, "backward induction needs an acyclic game");
    Core c(game, prior, params, opt);
    RobotSolution r = make_robot_layout(game);
    const int S = game.num_states();
    for (auto it = order->rbegin(); it != order->rend(); ++it) {
        int s = *it;
        double* q = r.q_r.data() + c.roff[s];
        double* pi = r.pi_r.data() + c.roff[s];
        if (!game.terminal[s]) c.q_and_pi(s, r.v_r, params.beta_r, q, pi);
        for (int h = 0; h < game.num_humans(); ++h)
            for (int g = 0; g < game.num_goals(h); ++g) {
                double* ve_hg = r.v_e.data() + static_cast<std::size_t>(game.goal_offset[h] + g) * S;
                ve_hg[s] = c.ve_state(s, h, g, pi, ve_hg);
            }
        c.x_u_state(s, r.v_e, r.x_h, r.u_r);
        if (game.terminal[s]) {
            c.terminal_row(s, r.u_r[s], q, pi, r.v_r[s]);
        } else {
            double acc = r.u_r[s];
            for (int a = 0; a < game.num_robot(s); ++a) acc += pi[a] * q[a];
            r.v_r[s] = acc;
        }
    }
    r.beta_reached = params.beta_r;
    c.check_q(r);
    return r;
}

RobotSolution solve_robot_fixed_point(const Game& game, const HumanPrior& prior, const PowerParams& params,
                                      const RobotOptions& opt) {
    check_params(params);
    Core c(game, prior, params, opt);
    RobotSolution r = make_robot_layout(game);
    const int S = game.num_states();
    std::vector<double> sched = opt.beta_schedule.empty() ? default_schedule(opt.schedule_steps) : opt.beta_schedule;
    if (sched.empty() || sched.front() != 0.0 || sched.back() != 1.0 || !std::is_sorted(sched.begin(), sched.end()))
        throw Error(ErrorKind::argument, "beta_r schedule must rise from 0 to 1");
    if (std::isinf(params.beta_r)) sched = {0.0, 1.0};

    // exact beta_r = 0 start: uniform policy, linear solves
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < game.num_robot(s); ++a) r.pi_r[c.roff[s] + a] = 1.0 / game.num_robot(s);
    c.ve_all(r.pi_r, r.v_e);
    for (int s = 0; s < S; ++s) c.x_u_state(s, r.v_e, r.x_h, r.u_r);
    r.v_r = c.vr_solve(r.pi_r, r.u_r);

    std::vector<double> q(c.roff[S]), pi(c.roff[S]), ve(r.v_e.size()), x(r.x_h.size()), u(S), vn(S);
    double beta = 0;
    for (std::size_t k = 1; k < sched.size(); ++k) {
        beta = scaled_beta(params.beta_r, sched[k]);
        double lam = std::isinf(beta) ? 1.0 : opt.damping;
        bool ok = false;
        double res = 0;
        for (long it = 0; it < opt.max_iter; ++it) {
            c.policy_all(r.v_r, beta, q, pi);
            if (opt.map == FixedPointMap::evaluate) {
                c.ve_all(pi, ve);
            } else {
                for (int h = 0; h < game.num_humans(); ++h)
                    for (int g = 0; g < game.num_goals(h); ++g) {
                        std::size_t base = static_cast<std::size_t>(game.goal_offset[h] + g) * S;
                        for (int s = 0; s < S; ++s)
                            ve[base + s] = c.ve_state(s, h, g, pi.data() + c.roff[s], r.v_e.data() + base);
                    }
            }
            for (int s = 0; s < S; ++s) c.x_u_state(s, ve, x, u);
            if (opt.map == FixedPointMap::evaluate) {
                vn = c.vr_solve(pi, u);
            } else {
                for (int s = 0; s < S; ++s) {
                    if (game.terminal[s]) {
                        vn[s] = opt.terminal == TerminalReward::self_loop ? u[s] / (1 - game.gamma_r) : u[s];
                        continue;
                    }
                    double acc = u[s];
                    for (int a = 0; a < game.num_robot(s); ++a) acc += pi[c.roff[s] + a] * q[c.roff[s] + a];
                    vn[s] = acc;
                }
            }
            res = max_diff(vn, r.v_r);
            if (opt.map == FixedPointMap::sweep) res = std::max(res, max_diff(ve, r.v_e));
            if (res <= opt.tol * std::max(1.0, max_abs(r.v_r))) {
                r.v_r = vn;
                r.v_e = ve;
                ok = true;
                break;
            }
            for (int s = 0; s < S; ++s) r.v_r[s] = (1 - lam) * r.v_r[s] + lam * vn[s];
            if (opt.map == FixedPointMap::sweep)
                for (std::size_t i = 0; i < ve.size(); ++i) r.v_e[i] = (1 - lam) * r.v_e[i] + lam * ve[i];
        }
        r.residual = std::max(r.residual, res);
        if (!ok) throw ConvergenceError("robot fixed point did not converge", beta, res);
    }
    // consistent final tables from the converged V_r
    c.policy_all(r.v_r, beta, r.q_r, r.pi_r);
    if (opt.map == FixedPointMap::evaluate) c.ve_all(r.pi_r, r.v_e);
    for (int s = 0; s < S; ++s) c.x_u_state(s, r.v_e, r.x_h, r.u_r);
    for (int s = 0; s < S; ++s) {
        if (game.terminal[s]) {
            c.terminal_row(s, r.u_r[s], r.q_r.data() + c.roff[s], r.pi_r.data() + c.roff[s], r.v_r[s]);
            continue;
        }
        double acc = r.u_r[s];
        for (int a = 0; a < game.num_robot(s); ++a) acc += r.pi_r[c.roff[s] + a] * r.q_r[c.roff[s] + a];
        r.v_r[s] = acc;
    }
    r.beta_reached = beta;
    c.check_q(r);
    return r;
}

RobotSolution solve_robot(const Game& game, const HumanPrior& prior, const PowerParams& params, const RobotOptions& opt) {
    if (is_acyclic(game)) return solve_robot_backward(game, prior, params, opt);
    return solve_robot_fixed_point(game, prior, params, opt);
}

HorizonBound horizon_bound(int num_humans, double gamma_r, const PowerParams& p, int horizon) {
    if (horizon <= 0) throw Error(ErrorKind::argument, "horizon must be positive");
    HorizonBound b;
    b.horizon = horizon;
    b.eps_x = p.eps_x;
    b.eps_q = p.eps_q;
    b.normalized = p.form == RobotPolicyForm::normalized_softmax;
    const double nh = std::pow(static_cast<double>(num_humans), p.eta);
    const double gh = std::pow(gamma_r, horizon);
    const double g1 = 1 - gamma_r;
    if (!(p.eps_x > 0)) {
        b.m_u = b.bound = kInf;
        return b;
    }
    b.m_u = nh * std::pow(p.eps_x, -p.xi * p.eta);
    if (b.normalized) {
        b.bound = gh * nh * (g1 + p.beta_r) / (std::pow(p.eps_x, p.xi * p.eta) * g1 * g1);
    } else {
        b.bound = p.eps_q > 0 ? gh * (b.m_u / g1) * (1 + 2 * p.beta_r * b.m_u / (p.eps_q * g1 * g1)) : kInf;
    }
    return b;
}

FiniteHorizonResult finite_horizon_solve(const Game& game, const HumanPrior& prior, const PowerParams& params,
                                         const RobotOptions& opt) {
    check_params(params);
    if (!params.horizon || *params.horizon <= 0) throw Error(ErrorKind::argument, "finite horizon needs H >= 1");
    if (params.form == RobotPolicyForm::power_law && !(params.eps_q > 0))
        throw Error(ErrorKind::argument, "finite horizon with the power-law policy needs eps_Q > 0");
    if (!(params.eps_x > 0)) throw Error(ErrorKind::argument, "finite horizon needs eps_X > 0");
    Core c(game, prior, params, opt);
    const int S = game.num_states(), H = *params.horizon;
    RobotSolution r = make_robot_layout(game);
    std::vector<double> vr_prev(S, 0.0), ve_prev(r.v_e.size(), 0.0);
    for (int d = 1; d <= H; ++d) {
        for (int s = 0; s < S; ++s) {
            double* q = r.q_r.data() + c.roff[s];
            double* pi = r.pi_r.data() + c.roff[s];
            c.q_and_pi(s, vr_prev, params.beta_r, q, pi);
            for (int h = 0; h < game.num_humans(); ++h)
                for (int g = 0; g < game.num_goals(h); ++g) {
                    std::size_t base = static_cast<std::size_t>(game.goal_offset[h] + g) * S;
                    r.v_e[base + s] = c.ve_state(s, h, g, pi, ve_prev.data() + base);
                }
        }
        for (int s = 0; s < S; ++s) {
            c.x_u_state(s, r.v_e, r.x_h, r.u_r);
            if (game.terminal[s] && opt.terminal == TerminalReward::once) {
                r.v_r[s] = r.u_r[s];
                continue;
            }
            double acc = r.u_r[s];
            for (int a = 0; a < game.num_robot(s); ++a) acc += r.pi_r[c.roff[s] + a] * r.q_r[c.roff[s] + a];
            r.v_r[s] = acc;
        }
        vr_prev = r.v_r;
        ve_prev = r.v_e;
    }
    r.beta_reached = params.beta_r;
    return {r, horizon_bound(game.num_humans(), game.gamma_r, params, H)};
}

RobotSolution evaluate_policy_power(const Game& game, const HumanPrior& prior, const PowerParams& params,
                                    const std::vector<double>& pi_r, const RobotOptions& opt) {
    Core c(game, prior, params, opt);
    const int S = game.num_states();
    if (pi_r.size() != c.roff[S]) throw Error(ErrorKind::argument, "robot policy does not match A_r layout");
    for (int s = 0; s < S; ++s) {
        double sum = 0;
        for (std::size_t i = c.roff[s]; i < c.roff[s + 1]; ++i) {
            if (!(pi_r[i] >= 0)) throw Error(ErrorKind::argument, "robot policy has negative mass");
            sum += pi_r[i];
        }
        if (std::abs(sum - 1) > 1e-9)
            throw Error(ErrorKind::argument, "robot policy at " + game.state_names[s] + " is not a distribution over A_r");
    }
    RobotSolution r = make_robot_layout(game);
    r.pi_r = pi_r;
    c.ve_all(r.pi_r, r.v_e);
    for (int s = 0; s < S; ++s) c.x_u_state(s, r.v_e, r.x_h, r.u_r);
    r.v_r = c.vr_solve(r.pi_r, r.u_r);
    for (int s = 0; s < S; ++s) {
        if (game.terminal[s]) {
            for (std::size_t i = c.roff[s]; i < c.roff[s + 1]; ++i)
                r.q_r[i] = opt.terminal == TerminalReward::self_loop ? game.gamma_r * r.v_r[s] : 0.0;
            continue;
        }
        std::vector<double> qt(game.num_robot(s));
        c.qtilde(s, r.v_r, qt.data());
        for (int a = 0; a < game.num_robot(s); ++a) r.q_r[c.roff[s] + a] = game.gamma_r * qt[a];
    }
    return r;
}

PowerReport power_report(const Game& game, const RobotSolution& sol) {
    PowerReport rep;
    rep.state_names = game.state_names;
    rep.human_names = game.human_names;
    const int S = game.num_states(), H = game.num_humans();
    rep.x.resize(static_cast<std::size_t>(S) * H);
    rep.w.resize(rep.x.size());
    for (int s = 0; s < S; ++s)
        for (int h = 0; h < H; ++h) {
            double x = sol.x(h, s);
            rep.x[static_cast<std::size_t>(s) * H + h] = x;
            rep.w[static_cast<std::size_t>(s) * H + h] = power_bits(x);
        }
    rep.u_r = sol.u_r;
    return rep;
}

ScaleReport scale_invariance_check(const Game& game, const HumanPrior& prior, const RobotSolution& sol, double b,
                                   const PowerParams& params, const RobotOptions& opt) {
    Core c(game, prior, params, opt);
    const int S = game.num_states(), H = game.num_humans();
    ScaleReport rep;
    rep.b = b;
    std::vector<double> ve = sol.v_e;
    for (auto& v : ve) v *= b;
    std::vector<double> x(static_cast<std::size_t>(H) * S), u(S);
    for (int s = 0; s < S; ++s) {
        std::vector<double> xs(H);
        for (int h = 0; h < H; ++h) {
            double xv = game.has_x_override(h, s) ? std::pow(b, params.zeta) * game.x_override_at(h, s) : c.x_of(h, s, ve);
            xs[h] = x[static_cast<std::size_t>(h) * S + s] = xv;
        }
        u[s] = intrinsic_reward(xs, params);
    }
    auto vr = c.vr_solve(sol.pi_r, u);
    std::vector<double> q(c.roff[S]), pi(c.roff[S]);
    c.policy_all(vr, sol.beta_reached, q, pi);
    for (int s = 0; s < S; ++s) {
        if (game.terminal[s]) continue;
        double d = 0;
        for (std::size_t i = c.roff[s]; i < c.roff[s + 1]; ++i) d = std::max(d, std::abs(pi[i] - sol.pi_r[i]));
        rep.max_policy_diff = std::max(rep.max_policy_diff, d);
        if (d <= 1e-9) continue;
        bool low = false;
        if (params.eps_x > 0) {
            auto low_at = [&](int t) {
                for (int h = 0; h < H; ++h)
                    if (sol.x(h, t) < 10) return true;
                return false;
            };
            low = low_at(s);
            for (std::size_t j = 0; j < game.num_joint(s) && !low; ++j)
                for (auto& t : game.row(s, j))
                    if (low_at(t.next)) low = true;
        }
        (low ? rep.exempt : rep.mismatched).push_back(s);
    }
    rep.invariant = rep.mismatched.empty();
    return rep;
}

}  // namespace pg
