#include "powergame/td_learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "powergame/policy.hpp"

namespace pg {

LearnSchedule reference_schedule(const std::string& preset) {
    LearnSchedule s;
    if (preset == "beta_r_from_one") s.beta_r_start = 1.0;
    else if (preset == "eps_h_from_one") s.eps_h_start = 1.0;
    else if (preset != "default") throw Error(ErrorKind::argument, "unknown schedule preset " + preset);
    return s;
}

double x_h_estimator(std::span<const double> ve_hs, int sampled_goal, double zeta) {
    if (ve_hs.empty() || sampled_goal < 0 || sampled_goal >= static_cast<int>(ve_hs.size()))
        throw Error(ErrorKind::argument, "sampled goal out of range");
    double v = ve_hs[sampled_goal];
    return static_cast<double>(ve_hs.size()) * (v > 0 ? std::pow(v, zeta) : 0.0);
}

namespace {

int draw(std::span<const double> p, std::mt19937_64& rng) {
    double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (r < acc) return static_cast<int>(i);
    }
    for (std::size_t i = p.size(); i-- > 0;)
        if (p[i] > 0) return static_cast<int>(i);
    return 0;
}

// softmax over log-weights, in place
void softmax_logits(std::vector<double>& w) {
    double m = -kInf;
    for (double x : w) m = std::max(m, x);
    double z = 0;
    for (double& x : w) z += (x = std::isinf(x) && x < 0 ? 0.0 : std::exp(x - m));
    for (double& x : w) x /= z;
}

struct Learner {
    const Game& game;
    const HumanPrior& prior;
    const PowerParams& par;
    const LearnSchedule& sc;
    TerminalReward terminal;
    int S, H;
    std::vector<std::size_t> roff;
    std::vector<double> ve, x, qt, theta, vr_ac;
    std::vector<long> visits_r, visits_e;
    std::vector<double> xs_buf;
    mutable std::vector<double> q_buf;
    std::vector<double> u_cache;  // U_r per state from the x table; NaN when stale

    Learner(const Game& g, const HumanPrior& p, const PowerParams& pp, const LearnSchedule& s, TerminalReward t)
        : game(g), prior(p), par(pp), sc(s), terminal(t), S(g.num_states()), H(g.num_humans()) {
        xs_buf.resize(H);
        roff.assign(S + 1, 0);
        for (int st = 0; st < S; ++st) roff[st + 1] = roff[st] + game.num_robot(st);
        const int G = game.total_goals();
        ve.assign(static_cast<std::size_t>(G) * S, 0.0);
        for (int h = 0; h < H; ++h)
            for (int k = 0; k < game.num_goals(h); ++k)
                for (int st = 0; st < S; ++st)
                    ve[idx(h, k, st)] = game.terminal[st] ? (game.member(h, k, st) ? 1.0 : 0.0) : prior.v(h, k, st);
        x.assign(static_cast<std::size_t>(H) * S, 0.0);
        for (int h = 0; h < H; ++h)
            for (int st = 0; st < S; ++st) x[h * S + st] = exact_x(h, st);
        u_cache.assign(S, std::numeric_limits<double>::quiet_NaN());
        theta.assign(roff[S], 0.0);
        qt.assign(roff[S], 0.0);
        vr_ac.assign(S, 0.0);
        for (int st = 0; st < S; ++st) {
            double v = u_of(st) / (1 - game.gamma_r);
            vr_ac[st] = v;
            for (std::size_t i = roff[st]; i < roff[st + 1]; ++i) qt[i] = v;
        }
        visits_r.assign(roff[S], 0);
        visits_e.assign(static_cast<std::size_t>(G) * S, 0);
    }

    std::size_t idx(int h, int g, int s) const { return static_cast<std::size_t>(game.goal_offset[h] + g) * S + s; }

    // X from the current v_e row (exact sum; used for initialization and terminals)
    double exact_x(int h, int s) const {
        if (game.has_x_override(h, s)) return game.x_override_at(h, s);
        double acc = 0;
        for (int k = 0; k < game.num_goals(h); ++k) acc += vpow(ve[idx(h, k, s)]);
        return acc;
    }

    double vpow(double v) const {
        if (!(v > 0)) return 0.0;
        return par.zeta == 2.0 ? v * v : std::pow(v, par.zeta);
    }

    // Terminal rows of v_e never move, so x at terminals stays exact; in table mode the
    // nonterminal entries are kept equal to the row sum by set_ve.
    double u_of(int s) {
        double& u = u_cache[s];
        if (std::isnan(u)) {
            for (int h = 0; h < H; ++h) xs_buf[h] = x[h * S + s];
            u = intrinsic_reward(xs_buf, par);
        }
        return u;
    }

    void set_ve(int h, int g, int s, double v) {
        std::size_t i = idx(h, g, s);
        if (sc.x_mode == XMode::table && !game.has_x_override(h, s)) {
            x[h * S + s] += vpow(v) - vpow(ve[i]);
            u_cache[s] = std::numeric_limits<double>::quiet_NaN();
        }
        ve[i] = v;
    }

    void set_x(int h, int s, double v) {
        x[h * S + s] = v;
        u_cache[s] = std::numeric_limits<double>::quiet_NaN();
    }

    double terminal_vr(int s) {
        double u = u_of(s);
        return terminal == TerminalReward::self_loop ? u / (1 - game.gamma_r) : u;
    }

    // target policy at s for the robot (power law on Q_r, or the actor's softmax)
    void target_pi(int s, double beta, std::vector<double>& pi) const {
        const int R = game.num_robot(s);
        pi.assign(R, 0.0);
        if (sc.mode == LearnMode::actor_critic) {
            for (int a = 0; a < R; ++a) pi[a] = theta[roff[s] + a];
            softmax_logits(pi);
            return;
        }
        auto& q = q_buf;
        q.resize(R);
        const double gr = game.gamma_r;
        for (int a = 0; a < R; ++a) q[a] = gr > 0 ? gr * qt[roff[s] + a] : qt[roff[s] + a];
        PowerParams p = par;
        p.beta_r = beta;
        robot_policy(q, p, pi);
    }

    double vr_of(int s, double beta, std::vector<double>& pi) {
        if (game.terminal[s]) return terminal_vr(s);
        if (sc.mode == LearnMode::actor_critic) return vr_ac[s];
        target_pi(s, beta, pi);
        double acc = u_of(s);
        for (int a = 0; a < game.num_robot(s); ++a) acc += pi[a] * game.gamma_r * qt[roff[s] + a];
        return acc;
    }
};

}  // namespace

Phase2Result phase2_learn(const Game& game, const HumanPrior& prior, const PowerParams& params,
                          const LearnSchedule& sc, TerminalReward terminal) {
    check_params(params);
    if (!(sc.alpha_e > 0 && sc.alpha_e <= 1) || !(sc.alpha_r > 0 && sc.alpha_r <= 1) || !(sc.alpha_x > 0 && sc.alpha_x <= 1))
        throw Error(ErrorKind::argument, "learning rates must lie in (0, 1]");
    if (!(sc.p_g >= 0 && sc.p_g <= 1)) throw Error(ErrorKind::argument, "p_g must lie in [0, 1]");
    if (sc.episodes < 1 || sc.max_steps < 1) throw Error(ErrorKind::argument, "episodes and max_steps must be positive");
    if (prior.num_states != game.num_states() || prior.goal_offset != game.goal_offset)
        throw Error(ErrorKind::argument, "prior does not belong to this game");

    // X_h and Q_r start at zero wherever the prior's adversary blocks every goal
    PowerParams lp = params;
    lp.eps_x = std::max(lp.eps_x, sc.eps_floor);
    lp.eps_q = std::max(lp.eps_q, sc.eps_floor);
    Learner L(game, prior, lp, sc, terminal);
    const int S = L.S, H = L.H;
    Phase2Result out;
    std::mt19937_64 rng(sc.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<int> starts;
    if (sc.exploring_starts) {
        auto reach = reachable_states(game, game.initial);
        for (int s = 0; s < S; ++s)
            if (reach[s] && !game.terminal[s]) starts.push_back(s);
    }
    if (starts.empty()) starts = game.initial;

    const double beta_end = params.beta_r;
    std::vector<int> goals(H), ah(H);
    std::vector<double> pi, pi2, w, pr, row_v;
    for (long ep = 0; ep < sc.episodes; ++ep) {
        double f = sc.episodes > 1 ? static_cast<double>(ep) / (sc.episodes - 1) : 1.0;
        double beta = std::isinf(beta_end) ? (f < 1 ? std::max(sc.beta_r_start, 1.0) + f * 50.0 : kInf)
                                           : sc.beta_r_start + (beta_end - sc.beta_r_start) * f;
        if (beta_end == 0) beta = 0;
        double decay = std::pow(sc.alpha_end_factor, f);
        double eps_h = sc.eps_h_start + (sc.eps_h_end - sc.eps_h_start) * f;
        bool record = (sc.trace_stride > 0 && ep % sc.trace_stride == 0) || ep == sc.episodes - 1;
        EpisodeTrace tr;
        tr.episode = ep;
        int s = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)];
        for (int h = 0; h < H; ++h) goals[h] = std::uniform_int_distribution<int>(0, game.num_goals(h) - 1)(rng);
        double td_sum = 0, ret = 0;
        int td_n = 0;
        for (int t = 0; t < sc.max_steps && !game.terminal[s]; ++t) {
            const int R = game.num_robot(s);
            // behavior policy: target policy plus the count bonus in log-weight space
            L.target_pi(s, beta, pi);
            w.assign(R, 0.0);
            for (int a = 0; a < R; ++a)
                w[a] = std::log(pi[a]) + exploration_bonus(L.visits_r[L.roff[s] + a], sc.bonus_robot_init, sc.bonus_robot_decay);
            softmax_logits(w);
            int ar = draw(w, rng);
            for (int h = 0; h < H; ++h) {
                int n = game.num_human(s, h);
                if (unif(rng) < eps_h) ah[h] = std::uniform_int_distribution<int>(0, n - 1)(rng);
                else ah[h] = draw(prior.pi(h, goals[h], s), rng);
            }
            const std::size_t P = game.human_profiles(s);
            auto row = game.row(s, ar * P + game.profile_index(s, ah.data()));
            pr.clear();
            for (auto& tn : row) pr.push_back(tn.prob);
            int s2 = row[draw(pr, rng)].next;

            // effective values and power of each human at its sampled goal
            for (int h = 0; h < H; ++h) {
                int g = goals[h];
                std::size_t i = L.idx(h, g, s);
                double v2 = L.ve[L.idx(h, g, s2)];
                double y = prior_backup(game, h, g, s2, v2);
                double a = decay * (sc.harmonic_rate ? sc.alpha_e / (1.0 + L.visits_e[i] / sc.rate_scale) : sc.alpha_e);
                ++L.visits_e[i];
                L.set_ve(h, g, s, L.ve[i] + a * (y - L.ve[i]));
                out.max_ve = std::max(out.max_ve, L.ve[i]);
                if (L.ve[i] > 1 + sc.alpha_e) out.ve_excursion = true;
                if (sc.x_mode == XMode::sampled && !game.has_x_override(h, s)) {
                    row_v.resize(game.num_goals(h));
                    for (int k = 0; k < game.num_goals(h); ++k) row_v[k] = L.ve[L.idx(h, k, s)];
                    double xt = x_h_estimator(row_v, g, params.zeta);
                    double ax = decay * (sc.harmonic_rate ? sc.alpha_x / (1.0 + L.visits_e[i] / sc.rate_scale) : sc.alpha_x);
                    L.set_x(h, s, L.x[h * S + s] + ax * (xt - L.x[h * S + s]));
                }
            }
            double vr2 = L.vr_of(s2, beta, pi2);
            std::size_t ri = L.roff[s] + ar;
            double ar_rate = decay * (sc.harmonic_rate ? sc.alpha_r / (1.0 + L.visits_r[ri] / sc.rate_scale) : sc.alpha_r);
            ++L.visits_r[ri];
            double delta;
            if (sc.mode == LearnMode::dqn) {
                delta = vr2 - L.qt[ri];
                L.qt[ri] += ar_rate * delta;
            } else {
                delta = L.u_of(s) + game.gamma_r * vr2 - L.vr_ac[s];
                L.vr_ac[s] += ar_rate * delta;
                L.target_pi(s, beta, pi);
                for (int a = 0; a < R; ++a) L.theta[L.roff[s] + a] += ar_rate * delta * ((a == ar) - pi[a]);
            }
            td_sum += std::abs(delta);
            ++td_n;
            double u2 = L.u_of(s2);
            ret += u2;
            ++out.steps;
            if (record) {
                TraceStep st;
                st.t = t, st.s = s, st.goals = goals, st.a_r = ar, st.a_h = ah, st.s2 = s2, st.u_r = u2;
                for (int h = 0; h < H; ++h) st.w_h.push_back(power_bits(L.x[h * S + s2]));
                tr.steps.push_back(std::move(st));
            }
            for (int h = 0; h < H; ++h)
                if (sc.p_g > 0 && unif(rng) < sc.p_g) goals[h] = std::uniform_int_distribution<int>(0, game.num_goals(h) - 1)(rng);
            s = s2;
        }
        out.td_curve.push_back(td_n ? td_sum / td_n : 0.0);
        out.returns.push_back(ret);
        if (record) {
            tr.ret = ret;
            out.traces.push_back(std::move(tr));
        }
    }

    // final tables at the target beta; table-mode x is re-summed to drop the incremental drift
    if (sc.x_mode == XMode::table)
        for (int h = 0; h < H; ++h)
            for (int s = 0; s < S; ++s) L.set_x(h, s, L.exact_x(h, s));
    RobotSolution& r = out.solution;
    r = make_robot_layout(game);
    r.v_e = L.ve;
    r.x_h = L.x;
    for (int s = 0; s < S; ++s) r.u_r[s] = L.u_of(s);
    for (int s = 0; s < S; ++s) {
        const int R = game.num_robot(s);
        if (game.terminal[s]) {
            r.v_r[s] = L.terminal_vr(s);
            for (int a = 0; a < R; ++a) {
                r.q_r[r.robot_offset[s] + a] = terminal == TerminalReward::self_loop ? game.gamma_r * r.v_r[s] : 0.0;
                r.pi_r[r.robot_offset[s] + a] = 1.0 / R;
            }
            continue;
        }
        L.target_pi(s, beta_end, pi);
        for (int a = 0; a < R; ++a) {
            r.q_r[r.robot_offset[s] + a] = game.gamma_r * L.qt[L.roff[s] + a];
            r.pi_r[r.robot_offset[s] + a] = pi[a];
        }
        r.v_r[s] = L.vr_of(s, beta_end, pi);
    }
    r.beta_reached = beta_end;
    return out;
}

}  // namespace pg
