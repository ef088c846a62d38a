// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Reference numbers are compared as given; closed forms are recomputed here
// (test side) rather than taken from the library's own oracle helpers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fuzz_driver.hpp"
#include "oracle.hpp"
#include "powergame/gamespec.hpp"
#include "powergame/gridworld.hpp"
#include "powergame/human_prior.hpp"
#include "powergame/policy.hpp"
#include "powergame/power.hpp"
#include "powergame/robot_planner.hpp"
#include "powergame/scenarios.hpp"
#include "powergame/td_learner.hpp"

using namespace pg;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [fail: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int state(const Game& g, const char* name) {
    int s = g.state_index(name);
    if (s < 0) throw Error(ErrorKind::argument, std::string("no state ") + name);
    return s;
}

int argmax(std::span<const double> v) {
    int b = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i)
        if (v[i] > v[b]) b = i;
    return b;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// ---------------------------------------------------------------- 1

void commitment(Outcome& o) {
    auto sc = build_commitment_game();
    auto sol = solve_scenario(sc);
    const Game& g = sc.game;
    double x1 = sol.robot.x(0, state(g, "s1"));
    double xa = sol.robot.x(0, state(g, "sA"));
    auto cont = evaluate_policy_power(g, sol.prior, sc.params, commitment_contingent_plan(g), sc.robot_opt);
    double xp = cont.x(0, state(g, "sp"));
    auto top = sol.robot.pi(state(g, "s0"));
    const auto& names = g.robot_actions[state(g, "s0")];
    std::string chosen = names[argmax(top)];
    o.detail << "X(s1)=" << x1 << " X(sp|contingent)=" << xp << " X(sA)=" << xa << " chosen=" << chosen;
    o.require(near(x1, 2.0, 1e-9), "X(s1) = 2");
    o.require(near(xp, 0.5, 1e-9), "X(sp) = 0.5");
    o.require(near(xa, 1.0, 1e-9), "X(sA) = 1");
    o.require(chosen == "c1" || chosen == "c2", "commitment action selected");
}

// ---------------------------------------------------------------- 2

// human picks the right item with softmax prob e^b / (e^b + k - 1); X = k p^zeta
double menu_w_test(int k, double beta, double zeta) {
    double p = std::exp(beta) / (std::exp(beta) + k - 1);
    return std::log2(k * std::pow(p, zeta));
}

void menu(Outcome& o) {
    int worst_gap = 0;
    for (double beta : {0.5, 1.0, std::log(3.0), 2.0})
        for (double zeta : {1.5, 2.0, 3.0}) {
            MenuParams p;
            p.beta_h = beta;
            p.zeta = zeta;
            int kb = 1;
            for (int k = 2; k <= p.k_max; ++k)
                if (menu_w_test(k, beta, zeta) > menu_w_test(kb, beta, zeta)) kb = k;
            double approx = (std::exp(beta) - 1) / (zeta - 1);
            auto sc = build_menu_game(p);
            auto sol = solve_scenario(sc);
            int ks = menu_solver_k(sc, sol.robot);
            o.require(std::abs(kb - approx) <= 1.0, "closed form within 1 at beta " + std::to_string(beta) + " zeta " + std::to_string(zeta));
            o.require(ks == kb, "solver k == brute force at beta " + std::to_string(beta) + " zeta " + std::to_string(zeta));
            worst_gap = std::max(worst_gap, std::abs(ks - kb));
        }
    o.detail << "12 (beta, zeta) pairs, max |k_solver - k_bruteforce| = " << worst_gap;
}

// ---------------------------------------------------------------- 3

void confirmation(Outcome& o) {
    ConfirmationParams p;
    auto sc = build_confirmation_game(p);
    int k = confirmation_solver_k(sc, solve_scenario(sc).robot);
    p.gamma_h = 0.5;
    auto sc2 = build_confirmation_game(p);
    int k2 = confirmation_solver_k(sc2, solve_scenario(sc2).robot);
    o.detail << "k(gamma_h=0.99)=" << k << " k(gamma_h=0.5)=" << k2;
    o.require(k == 3, "asks back twice");
    o.require(k2 == 1, "impatient human asked once");
}

// ---------------------------------------------------------------- 4

void resource(Outcome& o) {
    auto share = [](const std::string& f) {
        ResourceParams p;
        p.f_name = f;
        auto sc = build_resource_game(p);
        return resource_solver_split(sc, solve_scenario(sc).robot, p);
    };
    double sq = share("square"), sl = share("square_log"), cc = share("sqrt");
    o.detail << "min share: m^2 " << sq << ", m^2+0.1 log m " << sl << ", sqrt " << cc;
    o.require(sq == 0.0, "full concentration");
    o.require(near(sl, 0.14, 0.01), "0.14/0.86 split");
    o.require(cc == 0.5, "even split");
}

// ---------------------------------------------------------------- 5

struct SelfHarmModel {
    double x, v, gamma, a;  // a = -xi eta
    double u(double X) const { return -std::pow(X, a); }
    double v_withhold() const { return u(x) / (1 - gamma); }
    double v_provide(double p) const {
        double vc = u(1.0) / (1 - gamma);
        return (u(x + v) + gamma * p * vc) / (1 - gamma * (1 - p));
    }
    double threshold() const {
        double lo = 0, hi = 1e-3;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (v_provide(mid) > v_withhold() ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
};

void self_harm(Outcome& o) {
    for (double v : {0.1, 0.5, 0.9}) {
        SelfHarmModel m{100.0, v, 0.99, -1.0};
        double t = m.threshold();
        double ratio = t / (v / 1e6);
        o.detail << "v=" << v << " p*=" << t << " (x" << ratio << ") ";
        o.require(ratio >= 0.5 && ratio <= 2.0, "threshold within factor 2 at v=" + std::to_string(v));
        for (double f : {1 - 1e-4, 1 + 1e-4}) {
            SelfHarmParams p;
            p.v = v;
            p.p = t * f;
            auto sc = build_self_harm_game(p);
            auto sol = solve_scenario(sc);
            bool provides = self_harm_solver_provides(sc, sol.robot);
            o.require(provides == (m.v_provide(p.p) > m.v_withhold()), "solver side of the exact inequality");
            if (provides) {
                double vs = sol.robot.v_r[state(sc.game, "s_p")], vt = m.v_provide(p.p);
                o.require(std::abs(vs - vt) <= 1e-9 * std::abs(vt), "V_r(s_p) to 1e-9");
            }
        }
    }
}

// ---------------------------------------------------------------- 6

void pause_destroy(Outcome& o) {
    PauseDestroyParams p;
    double x0 = pause_destroy_x0(p);
    PauseDestroyParams q = p;
    q.q = 0.001;
    double x2 = pause_destroy_x2(q);
    double x0q = pause_destroy_x0(q);
    q.x = 0.5 * (x0q + x2);
    auto sc = build_pause_destroy_game(q);
    int mid = pause_destroy_solver_choice(sc, solve_scenario(sc).robot);
    o.detail << "x*_0=" << x0 << " (literal closed form " << pause_destroy_literal_x0(p) << ") x*_2(q=0.001)=" << x2
             << " choice at x=" << q.x << ": " << mid;
    o.require(x0 >= 0.5 && x0 <= 2.0, "x*_0 in [0.5, 2]");
    o.require(near(x2, 92.0, 2.0), "x*_2 = 92 +- 2");
    o.require(mid == 1, "pause-only between the thresholds");
}

// ---------------------------------------------------------------- 7

void belief(Outcome& o) {
    auto sc = build_belief_manipulation_game();
    auto sol = solve_scenario(sc);
    const Game& g = sc.game;
    auto pi = sol.robot.pi(state(g, "s0"));
    std::string chosen = g.robot_actions[state(g, "s0")][argmax(pi)];
    double udd = sol.robot.u_r[state(g, "sDD")], ucd = sol.robot.u_r[state(g, "sCD")];
    o.detail << "chosen s^" << chosen << " U_r(DD)=" << udd << " U_r(CD)=" << ucd;
    o.require(chosen == "DD" && pi[argmax(pi)] == 1.0, "selects s^DD");
    o.require(udd == -8.0 / 3.0 && belief_u_dd({}) == -8.0 / 3.0, "-8/3 exactly");
    o.require(ucd == -4.0 && belief_u_cd({}) == -4.0, "-4 exactly");
}

// ---------------------------------------------------------------- 8

// test-side scan of p = sigmoid(beta / (1 - gamma p)) (Q gap of the re-collecting action)
std::vector<double> roots_test(double beta, double gamma) {
    auto f = [&](double p) { return 1 / (1 + std::exp(-beta / (1 - gamma * p))) - p; };
    std::vector<double> r;
    const int n = 200000;
    double prev = f(0.0);
    for (int i = 1; i <= n; ++i) {
        double p = static_cast<double>(i) / n;
        double cur = p < 1 ? f(p) : -1;
        if ((prev > 0) != (cur > 0)) {
            double lo = static_cast<double>(i - 1) / n, hi = p;
            for (int k = 0; k < 80; ++k) {
                double m = 0.5 * (lo + hi);
                ((f(m) > 0) == (f(lo) > 0) ? lo : hi) = m;
            }
            r.push_back(0.5 * (lo + hi));
        }
        prev = cur;
    }
    return r;
}

void bifurcation(Outcome& o) {
    auto folds = bifurcation_folds(0.99, 0.0, 1.0);
    auto roots = bifurcation_roots(0.275, 0.99);
    auto troots = roots_test(0.275, 0.99);
    o.detail << "folds:";
    for (double b : folds) o.detail << " " << b;
    o.detail << "; roots at 0.275:";
    for (double r : roots) o.detail << " " << r;
    bool agree = troots.size() == roots.size();
    for (std::size_t i = 0; agree && i < roots.size(); ++i) agree = near(troots[i], roots[i], 1e-6);
    o.detail << "; test-side scan agrees: " << (agree ? "yes" : "no");
    o.require(agree, "library roots equal the test-side scan");
    o.require(folds.size() == 2 && near(folds[0], 0.203, 0.01) && near(folds[1], 0.78, 0.02), "folds at 0.203 and 0.78");
    std::vector<double> want{0.52, 0.59, 0.72};
    bool ok = roots.size() == 3;
    for (std::size_t i = 0; ok && i < 3; ++i) ok = near(roots[i], want[i], 0.01);
    o.require(ok, "roots {0.52, 0.59, 0.72} at beta = 0.275");
}

// ---------------------------------------------------------------- 9

double w_test(const std::vector<std::vector<double>>& rows, double zeta) {
    double x = 0;
    for (std::size_t s = 0; s < rows[0].size(); ++s) {
        double m = 0;
        for (auto& r : rows) m = std::max(m, r[s]);
        x += std::pow(m, zeta);
    }
    return std::log2(x);
}

// grid search over the simplex for two- or three-action bandits
double e_zeta_grid(const std::vector<std::vector<double>>& rows, double zeta, int n) {
    double best = -1e300;
    std::vector<double> pi(rows.size());
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= (rows.size() == 3 ? n - i : 0); ++j) {
            pi[0] = static_cast<double>(i) / n;
            if (rows.size() == 3) pi[1] = static_cast<double>(j) / n, pi[2] = 1 - pi[0] - pi[1];
            else pi[1] = 1 - pi[0];
            best = std::max(best, bandit_objective(rows, pi, zeta));
        }
    return best;
}

void empowerment(Outcome& o) {
    std::mt19937_64 rng(2024);
    std::gamma_distribution<double> gam(0.7, 1.0);
    int violations = 0, w_mismatch = 0, grid_gap = 0;
    double worst = -1e300;
    BanditOptions opt;
    for (double zeta : {1.0, 1.5, 2.0})
        for (int i = 0; i < 1000; ++i) {
            int A = 2 + static_cast<int>(rng() % 3), S = 2 + static_cast<int>(rng() % 4);
            std::vector<std::vector<double>> rows(A, std::vector<double>(S));
            for (auto& r : rows) {
                double z = 0;
                for (auto& x : r) z += (x = gam(rng));
                for (auto& x : r) x /= z;
            }
            auto res = bandit_empowerment(rows, zeta, opt);
            double wt = w_test(rows, zeta);
            if (!near(res.w, wt, 1e-12)) ++w_mismatch;
            if (res.e_zeta > wt + 1e-6) ++violations;
            worst = std::max(worst, res.e_zeta - wt);
            // the ascent must not fall short of a 0.01 grid on small bandits
            if (i < 30 && A <= 3 && res.e_zeta < e_zeta_grid(rows, zeta, 100) - 1e-3) ++grid_gap;
        }
    std::vector<std::vector<double>> id{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    auto r = bandit_empowerment(id, 1.0);
    o.detail << "3000 bandits, violations " << violations << ", max(E-W) " << worst << ", identity E=" << r.e_zeta
             << " W=" << r.w;
    o.require(violations == 0, "E^zeta <= W + 1e-6");
    o.require(w_mismatch == 0, "W equals the test-side formula");
    o.require(grid_gap == 0, "ascent reaches the grid optimum");
    o.require(near(r.e_zeta, 2.0, 1e-6) && near(r.w, 2.0, 1e-12), "identity channel equality");
}

// ---------------------------------------------------------------- 10

void gridworld(Outcome& o) {
    auto cfg = default_gridworld_config();
    auto sc = build_gridworld(cfg);
    int ok = 0;
    for (std::uint64_t seed : {12, 22, 32, 42, 52}) {
        auto t0 = std::chrono::steady_clock::now();
        auto run = gridworld_learn_run(cfg, sc, seed, gridworld_phase1_schedule(), gridworld_learn_schedule());
        ok += run.events.in_order();
        o.detail << "seed " << seed << ": key " << run.events.key_step << " unlock " << run.events.unlock_step << " aside "
                 << run.events.aside_step << " (" << static_cast<int>(seconds_since(t0)) << "s); ";
        std::fflush(stdout);
    }
    o.detail << ok << "/5 in order";
    o.require(ok == 5, "all five seeds produce key -> unlock -> aside");
}

// ---------------------------------------------------------------- 11

void oracle_equivalence(Outcome& o) {
    std::mt19937_64 rng(11);
    double worst = 0, worst_ref = 0;
    std::vector<Game> games;
    for (int i = 0; i < 50; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        g.gamma_r = 0.5 + 0.4 * (i % 5) / 4.0;
        PowerParams par;
        par.beta_r = (i % 3 == 0) ? kInf : 1.0 + i % 4;
        auto pb = solve_prior_backward(g);
        auto pf = solve_prior_fixed_point(g);
        auto rb = solve_robot_backward(g, pb, par);
        auto rf = solve_robot_fixed_point(g, pf, par);
        auto ref = oracle::solve_robot(g, oracle::solve_prior(g), par);
        for (int s = 0; s < g.num_states(); ++s) {
            double scale = std::max(1.0, std::abs(rb.v_r[s]));
            worst = std::max(worst, std::abs(rb.v_r[s] - rf.v_r[s]) / scale);
            worst_ref = std::max(worst_ref, std::abs(rb.v_r[s] - ref.vr[s]) / scale);
            for (int h = 0; h < g.num_humans(); ++h)
                for (int k = 0; k < g.num_goals(h); ++k) {
                    worst = std::max(worst, std::abs(rb.ve(h, k, s) - rf.ve(h, k, s)));
                    worst = std::max(worst, std::abs(pb.v(h, k, s) - pf.v(h, k, s)));
                    worst_ref = std::max(worst_ref, std::abs(rb.ve(h, k, s) - ref.ve[h][k][s]));
                }
            for (std::size_t a = 0; a < rb.pi(s).size(); ++a) worst = std::max(worst, std::abs(rb.pi(s)[a] - rf.pi(s)[a]));
        }
        auto reach = reachable_states(g, g.initial);
        int open = 0;
        for (int s = 0; s < g.num_states(); ++s) open += reach[s] && !g.terminal[s];
        if (games.size() < 5 && g.num_humans() == 1 && open >= 3) games.push_back(g);
    }
    o.detail << "fixed point vs backward max diff " << worst << ", backward vs test oracle " << worst_ref;
    o.require(worst <= 1e-8, "fixed point matches backward within 1e-8");
    o.require(worst_ref <= 1e-9, "backward matches the test-side oracle");

    double gap1 = 0, gap2 = 0;
    for (std::size_t i = 0; i < games.size(); ++i) {
        Game& g = games[i];
        g.gamma_r = 0.5;
        PowerParams par;
        par.beta_r = 2.0;
        auto exact_p = solve_prior_backward(g);
        auto exact_r = solve_robot_backward(g, exact_p, par);
        auto reach = reachable_states(g, g.initial);

        // the exact values assume the prior's own policies, so the learners run without the
        // epsilon perturbation at the end and with decaying rates
        Phase1Schedule s1;
        s1.episodes = 200000;
        s1.max_steps = 20;
        s1.alpha_m = 0.05;
        s1.alpha_end_factor = 0.05;
        s1.eps_r_end = 0.0;
        auto learned_p = phase1_learn_all(g, s1, 100 + i, ExecPolicy::serial);
        LearnSchedule s2;
        s2.episodes = 200000;
        s2.max_steps = 20;
        s2.alpha_e = s2.alpha_r = s2.alpha_x = 0.05;
        s2.alpha_end_factor = 0.05;
        s2.eps_h_start = s2.eps_h_end = 0.0;
        s2.seed = 200 + i;
        auto learned_r = phase2_learn(g, exact_p, par, s2);
        for (int s = 0; s < g.num_states(); ++s) {
            if (!reach[s] || g.terminal[s]) continue;
            for (int h = 0; h < g.num_humans(); ++h)
                for (int k = 0; k < g.num_goals(h); ++k) {
                    gap1 = std::max(gap1, std::abs(learned_p.v(h, k, s) - exact_p.v(h, k, s)));
                    gap2 = std::max(gap2, std::abs(learned_r.solution.ve(h, k, s) - exact_r.ve(h, k, s)));
                }
        }
    }
    o.detail << "; " << games.size() << " learner games: phase-1 V^m gap " << gap1 << ", phase-2 V^e gap " << gap2;
    o.require(games.size() == 5, "five learner games");
    o.require(gap1 <= 0.05, "phase 1 within 0.05");
    o.require(gap2 <= 0.05, "phase 2 within 0.05");
}

// ---------------------------------------------------------------- 12

Game five_state_cycle() {
    GameBuilder b("cycle5");
    int h = b.add_human("h", 0.9);
    int a = b.add_state("a", false, true), c = b.add_state("b"), d = b.add_state("c"), e = b.add_state("d");
    int t = b.add_state("t", true);
    b.set_robot_actions(a, {"stay", "go"});
    b.set_human_actions(a, h, {"x", "y"});
    b.set_transition(a, 0, {0}, {{a, 0.5}, {c, 0.5}});
    b.set_transition(a, 0, {1}, {{d, 1.0}});
    b.set_transition(a, 1, {0}, {{c, 1.0}});
    b.set_transition(a, 1, {1}, {{e, 0.7}, {a, 0.3}});
    b.set_robot_actions(c, {"back", "on"});
    b.set_human_actions(c, h, {"x"});
    b.set_transition(c, 0, {0}, {{a, 1.0}});
    b.set_transition(c, 1, {0}, {{d, 0.6}, {t, 0.4}});
    b.set_robot_actions(d, {"loop"});
    b.set_human_actions(d, h, {"x", "y"});
    b.set_transition(d, 0, {0}, {{e, 1.0}});
    b.set_transition(d, 0, {1}, {{a, 0.5}, {t, 0.5}});
    b.set_robot_actions(e, {"r0", "r1"});
    b.set_human_actions(e, h, {"x"});
    b.set_transition(e, 0, {0}, {{a, 1.0}});
    b.set_transition(e, 1, {0}, {{t, 1.0}});
    b.add_goal(h, "end", {t});
    b.add_goal(h, "mid", {e});
    BehaviorParams bp;
    bp.beta = 2.0;
    b.set_default_behavior(h, bp);
    Game g = b.build();
    g.gamma_r = 0.9;
    return g;
}

void horizon(Outcome& o) {
    Game g = five_state_cycle();
    auto rep = validate_game(g);
    o.require(rep.ok(), "cycle game validates: " + rep.summary());
    o.require(!is_acyclic(g).has_value(), "game is cyclic");
    if (!rep.ok()) return;
    PowerParams par = bounded_preset();
    auto prior = solve_prior_fixed_point(g);
    auto full = solve_robot_fixed_point(g, prior, par);
    double prev_bound = 0;
    int prev_h = 0;
    for (int hz : {5, 10, 20, 40}) {
        PowerParams p = par;
        p.horizon = hz;
        auto fh = finite_horizon_solve(g, prior, p);
        double err = 0;
        for (int s = 0; s < g.num_states(); ++s) err = std::max(err, std::abs(fh.solution.v_r[s] - full.v_r[s]));
        o.detail << "H=" << hz << " err " << err << " bound " << fh.bound.bound << "; ";
        o.require(err <= fh.bound.bound, "error within bound at H=" + std::to_string(hz));
        if (prev_h) {
            double ratio = fh.bound.bound / prev_bound, want = std::pow(g.gamma_r, hz - prev_h);
            o.require(std::abs(ratio - want) <= 1e-12 * want, "bound decays by gamma_r^dH");
        }
        prev_bound = fh.bound.bound;
        prev_h = hz;
    }
}

// ---------------------------------------------------------------- 13

void axioms(Outcome& o) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int pd_cases = 0, pd_bad = 0;
    for (int i = 0; i < 2000; ++i) {
        int n = 2 + static_cast<int>(rng() % 4);
        std::vector<double> w(n);
        for (auto& x : w) x = -3 + 11 * U(rng);
        int a = static_cast<int>(rng() % n), b = static_cast<int>(rng() % n);
        if (a == b) continue;
        if (w[a] > w[b]) std::swap(a, b);
        double gap = w[b] - w[a];
        if (gap < 1e-2) continue;
        double delta = gap / 2 * (0.01 + 0.98 * U(rng));
        PowerParams p;
        p.xi = 1 + 2 * U(rng);
        p.eta = 1.01 + 2 * U(rng);
        auto xs = [](const std::vector<double>& ws) {
            std::vector<double> x;
            for (double v : ws) x.push_back(std::exp2(v));
            return x;
        };
        double before = intrinsic_reward(xs(w), p);
        w[a] += delta;
        w[b] -= delta;
        double after = intrinsic_reward(xs(w), p);
        ++pd_cases;
        if (!(after > before)) ++pd_bad;
    }
    int lb_cases = 0, lb_bad = 0;
    PowerParams lp;
    lp.xi = 1.0;
    lp.eta = 1.0;
    lp.permissive = true;
    for (int i = 0; i < 40; ++i)
        for (int j = 0; j < 40; ++j) {
            double wp = 1 + 19.0 * i / 39, wz = 30.0 * j / 39;
            std::vector<double> keep{2.0, std::exp2(wp)}, lose{1.0, std::exp2(wz)};
            double uk = intrinsic_reward(keep, lp), ul = intrinsic_reward(lose, lp);
            ++lb_cases;
            if (!(uk >= -1.0 - 1e-15 && -1.0 > ul)) ++lb_bad;
        }
    int cm_cases = 0, cm_bad = 0;
    while (cm_cases < 1000) {
        Game g = oracle::random_acyclic_game(rng);
        std::vector<int> cand;
        for (int s = 0; s < g.num_states(); ++s)
            if (!g.terminal[s] && g.num_robot(s) > 1) cand.push_back(s);
        if (cand.empty()) continue;
        int s = cand[rng() % cand.size()];
        std::vector<int> keep;
        for (int a = 0; a < g.num_robot(s); ++a)
            if (rng() % 2) keep.push_back(a);
        if (keep.empty() || static_cast<int>(keep.size()) == g.num_robot(s)) continue;
        Game r = restrict_robot_actions(g, s, keep);
        auto p0 = solve_prior_backward(g), p1 = solve_prior_backward(r);
        ++cm_cases;
        bool ok = true;
        for (int h = 0; h < g.num_humans(); ++h)
            for (int k = 0; k < g.num_goals(h); ++k) {
                auto q0 = p0.q(h, k, s), q1 = p1.q(h, k, s);
                for (std::size_t a = 0; a < q0.size(); ++a) ok = ok && q1[a] >= q0[a] - 1e-12;
            }
        cm_bad += !ok;
    }
    int si_cases = 0, si_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        PowerParams par;
        par.beta_r = (i % 2) ? kInf : 0.5 + 4 * U(rng);
        auto prior = solve_prior_backward(g);
        auto sol = solve_robot_backward(g, prior, par);
        double b = 0.05 + 0.9 * U(rng);
        auto rep = scale_invariance_check(g, prior, sol, b, par);
        ++si_cases;
        si_bad += !rep.invariant;
    }
    o.detail << "Pigou-Dalton " << pd_bad << "/" << pd_cases << ", last bit " << lb_bad << "/" << lb_cases
             << ", commitment monotonicity " << cm_bad << "/" << cm_cases << ", scale invariance " << si_bad << "/"
             << si_cases << " violations";
    o.require(pd_cases >= 1000 && pd_bad == 0, "Pigou-Dalton");
    o.require(lb_cases >= 1000 && lb_bad == 0, "last-bit protection");
    o.require(cm_bad == 0, "commitment monotonicity");
    o.require(si_bad == 0, "scale invariance");
}

// ---------------------------------------------------------------- 14

void parser(Outcome& o) {
    int fixed = 0, total = 0;
    for (auto& name : scenario_names()) {
        auto sc = build_named_scenario(name, {});
        std::string text = serialize_game(sc.game, sc.params);
        auto r = parse_gamespec(text);
        ++total;
        bool ok = r.ok() && game_equal(sc.game, r.doc->game) && serialize_game(r.doc->game, r.doc->power) == text;
        fixed += ok;
        o.require(ok, "round trip of " + name);
    }
    auto f = fuzz::run(1000000, 1);
    o.detail << fixed << "/" << total << " scenario specs are fixed points; fuzz " << f.iterations << " iterations, "
             << f.accepted << " accepted, " << f.crashes << " crashes";
    o.require(f.crashes == 0, "zero fuzz crashes: " + f.first_failure.substr(0, 200));
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<Criterion> all = {
        {1, "commitment game", 1, commitment},
        {2, "menu size", 1, menu},
        {3, "confirmation", 1, confirmation},
        {4, "resource allocation", 1, resource},
        {5, "self-harm threshold", 1, self_harm},
        {6, "pause/destroy", 1, pause_destroy},
        {7, "belief manipulation", 1, belief},
        {8, "bifurcation", 10, bifurcation},
        {9, "empowerment bound", 60, empowerment},
        {10, "gridworld", 600, gridworld},
        {11, "oracle equivalence", 300, oracle_equivalence},
        {12, "finite-horizon bound", 30, horizon},
        {13, "axiomatic properties", 60, axioms},
        {14, "parser robustness", 300, parser},
    };
    // optional list of criterion ids to run
    std::vector<int> only;
    for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
    int failed = 0;
    for (auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        Outcome o;
        auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        double dt = seconds_since(t0);
        if (dt > c.budget_s) o.require(false, "runtime over " + std::to_string(static_cast<int>(c.budget_s)) + "s");
        std::printf("criterion %2d %-22s %s  %.2fs  %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", dt, o.detail.str().c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
