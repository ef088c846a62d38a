#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>

#include "powergame/human_prior.hpp"
#include "powergame/policy.hpp"

namespace pg {

double potential_value(const Game& game, int h, int g, int s, Potential potential) {
    if (potential == Potential::none) return 0.0;
    if (!game.geometry) throw Error(ErrorKind::argument, "Manhattan potential needs a game with coordinates");
    const auto& geo = *game.geometry;
    const Cell& p = geo.human_pos[static_cast<std::size_t>(s) * game.num_humans() + h];
    const Cell& q = geo.goal_pos[h][g];
    return -static_cast<double>(std::abs(p.x - q.x) + std::abs(p.y - q.y));
}

double shaped_reward(const Game& game, int h, int g, int s, int s2, Potential potential) {
    double u = game.member(h, g, s2) ? 1.0 : 0.0;
    return u + game.gamma_h[h] * potential_value(game, h, g, s2, potential) - potential_value(game, h, g, s, potential);
}

namespace {

int sample(std::span<const double> p, std::mt19937_64& rng) {
    double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (r < acc) return static_cast<int>(i);
    }
    // rounding: last action with positive mass
    for (std::size_t i = p.size(); i-- > 0;)
        if (p[i] > 0) return static_cast<int>(i);
    return 0;
}

int sample_next(std::span<const Transition> row, std::mt19937_64& rng) {
    double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0;
    for (auto& t : row) {
        acc += t.prob;
        if (r < acc) return t.next;
    }
    for (std::size_t i = row.size(); i-- > 0;)
        if (row[i].prob > 0) return row[i].next;
    return -1;
}

double lerp(double a, double b, double f) { return a + (b - a) * f; }

}  // namespace

Phase1Result phase1_learn(const Game& game, int h, int g, const Phase1Schedule& sc, std::uint64_t seed) {
    const int S = game.num_states(), H = game.num_humans();
    std::vector<std::size_t> off(S + 1, 0);
    for (int s = 0; s < S; ++s) off[s + 1] = off[s] + game.num_human(s, h);
    Phase1Result out;
    out.human = h;
    out.goal = g;
    std::vector<double> phi(S, 0.0);
    for (int s = 0; s < S; ++s) phi[s] = potential_value(game, h, g, s, sc.potential);

    // stored values are shaped: q' = q - Phi(s)
    std::vector<double> q(off[S], 0.0), snap, pi_snap(off[S], 0.0), vsnap(S, 0.0);
    std::vector<long> count(off[S], 0);
    const double gam = game.gamma_h[h];

    auto refresh = [&] {
        snap = q;
        for (int s = 0; s < S; ++s) {
            if (game.terminal[s]) {
                vsnap[s] = 0.0;
                continue;
            }
            const int n = game.num_human(s, h);
            human_policy({snap.data() + off[s], static_cast<std::size_t>(n)}, game.behavior_at(s, h, g),
                         {pi_snap.data() + off[s], static_cast<std::size_t>(n)});
            double acc = 0;
            for (int a = 0; a < n; ++a) acc += pi_snap[off[s] + a] * (snap[off[s] + a] + phi[s]);
            vsnap[s] = acc;
        }
    };
    refresh();

    std::vector<int> starts;
    if (sc.exploring_starts) {
        auto reach = reachable_states(game, game.initial);
        for (int s = 0; s < S; ++s)
            if (reach[s] && !game.terminal[s]) starts.push_back(s);
    }
    if (starts.empty()) starts = game.initial;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> ah(H);
    std::vector<double> beh;
    out.td_curve.reserve(sc.episodes);
    for (long ep = 0; ep < sc.episodes; ++ep) {
        double f = sc.episodes > 1 ? static_cast<double>(ep) / (sc.episodes - 1) : 1.0;
        double eps_h = lerp(sc.eps_h_start, sc.eps_h_end, f);
        double eps_r = lerp(sc.eps_r_start, sc.eps_r_end, f);
        double decay = std::pow(sc.alpha_end_factor, f);
        int s = starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)];
        double td_sum = 0;
        int td_n = 0;
        for (int t = 0; t < sc.max_steps && !game.terminal[s]; ++t) {
            const auto& b = game.behavior_at(s, h, g);
            const int n = game.num_human(s, h);
            beh.assign(n, 0.0);
            std::vector<double> vals(n);
            for (int a = 0; a < n; ++a)
                vals[a] = snap[off[s] + a] + sc.bonus_init * std::pow(sc.bonus_decay, static_cast<double>(count[off[s] + a]));
            human_policy(vals, b, beh);
            for (auto& x : beh) x = (1 - eps_h) * x + eps_h / n;
            for (int o = 0; o < H; ++o) {
                if (o == h) {
                    ah[o] = sample(beh, rng);
                    continue;
                }
                int no = game.num_human(s, o);
                if (!b.mu.empty() && !b.mu[o].empty()) ah[o] = sample(b.mu[o], rng);
                else ah[o] = std::uniform_int_distribution<int>(0, no - 1)(rng);
            }
            const int R = game.num_robot(s);
            const std::size_t P = game.human_profiles(s), prof = game.profile_index(s, ah.data());
            int ar = 0;
            if (unif(rng) < eps_r) {
                ar = std::uniform_int_distribution<int>(0, R - 1)(rng);
            } else {
                double best = kInf;
                for (int a = 0; a < R; ++a) {
                    double acc = 0;
                    for (auto& tr : game.row(s, a * P + prof)) acc += tr.prob * prior_backup(game, h, g, tr.next, vsnap[tr.next]);
                    if (acc < best) best = acc, ar = a;
                }
            }
            int s2 = sample_next(game.row(s, ar * P + prof), rng);
            if (s2 < 0) break;
            const int a = ah[h];
            ++count[off[s] + a];
            bool absorbed = goal_absorbs(game, h, g, s2);
            double u = game.member(h, g, s2) ? 1.0 : 0.0;
            double c = absorbed ? 0.0 : 1.0;
            double vnext = 0;  // shaped value of s'
            if (game.terminal[s2]) {
                vnext = -phi[s2];
            } else {
                for (std::size_t i = off[s2]; i < off[s2 + 1]; ++i) vnext += pi_snap[i] * q[i];
            }
            double y = u + gam * c * phi[s2] - phi[s] + gam * c * vnext;
            double& cell = q[off[s] + a];
            double alpha = decay * (sc.harmonic_rate ? sc.alpha_m / (1.0 + count[off[s] + a] / sc.rate_scale) : sc.alpha_m);
            td_sum += std::abs(y - cell);
            ++td_n;
            cell += alpha * (y - cell);
            ++out.steps;
            if (out.steps % sc.target_period == 0) refresh();
            if (absorbed) break;
            s = s2;
        }
        out.td_curve.push_back(td_n ? td_sum / td_n : 0.0);
    }
    for (int s = 0; s < S; ++s)
        for (std::size_t i = off[s]; i < off[s + 1]; ++i)
            q[i] = game.terminal[s] ? (game.member(h, g, s) ? 1.0 : 0.0) : q[i] + phi[s];
    out.q = std::move(q);
    return out;
}

HumanPrior prior_from_q(const Game& game, const std::vector<Phase1Result>& tables) {
    HumanPrior p = make_prior_layout(game);
    const int S = game.num_states();
    for (const auto& t : tables) {
        int f = p.flat(t.human, t.goal);
        const auto& off = p.action_offset[t.human];
        if (t.q.size() != off[S]) throw Error(ErrorKind::argument, "learned table does not match the game");
        p.q_m[f] = t.q;
        for (int s = 0; s < S; ++s) {
            const std::size_t n = off[s + 1] - off[s];
            if (game.terminal[s]) {
                for (std::size_t i = off[s]; i < off[s + 1]; ++i) {
                    p.q_m[f][i] = game.member(t.human, t.goal, s) ? 1.0 : 0.0;
                    p.pi_h[f][i] = 1.0 / n;
                }
            } else {
                human_policy({p.q_m[f].data() + off[s], n}, game.behavior_at(s, t.human, t.goal), {p.pi_h[f].data() + off[s], n});
            }
            double acc = 0;
            for (std::size_t i = off[s]; i < off[s + 1]; ++i) acc += p.pi_h[f][i] * p.q_m[f][i];
            p.v_m[static_cast<std::size_t>(f) * S + s] = acc;
        }
    }
    return p;
}

HumanPrior phase1_learn_all(const Game& game, const Phase1Schedule& sched, std::uint64_t seed, ExecPolicy exec,
                            std::vector<Phase1Result>* raw) {
    std::vector<std::pair<int, int>> pairs;
    for (int h = 0; h < game.num_humans(); ++h)
        for (int g = 0; g < game.num_goals(h); ++g) pairs.emplace_back(h, g);
    std::vector<Phase1Result> res(pairs.size());
    std::exception_ptr err;
    std::mutex mu;
    const long n = static_cast<long>(pairs.size());
#pragma omp parallel for schedule(dynamic) if (exec == ExecPolicy::parallel)
    for (long i = 0; i < n; ++i) {
        try {
            std::uint64_t sd = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1));
            res[i] = phase1_learn(game, pairs[i].first, pairs[i].second, sched, sd);
        } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    HumanPrior p = prior_from_q(game, res);
    if (raw) *raw = std::move(res);
    return p;
}

}  // namespace pg
