#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "powergame/robot_planner.hpp"
#include "powergame/scenarios.hpp"

using namespace pg;

namespace {

double robot_gap(const Game& g, const RobotSolution& sol, const oracle::Robot& ref) {
    double d = 0;
    for (int s = 0; s < g.num_states(); ++s) {
        d = std::max(d, std::abs(sol.v_r[s] - ref.vr[s]) / std::max(1.0, std::abs(ref.vr[s])));
        for (int h = 0; h < g.num_humans(); ++h) {
            d = std::max(d, std::abs(sol.x(h, s) - ref.x[h][s]));
            for (int k = 0; k < g.num_goals(h); ++k) d = std::max(d, std::abs(sol.ve(h, k, s) - ref.ve[h][k][s]));
        }
        for (int a = 0; a < g.num_robot(s); ++a) d = std::max(d, std::abs(sol.pi(s)[a] - ref.pi[s][a]));
    }
    return d;
}

}  // namespace

TEST_CASE("backward robot solve matches the brute-force reference") {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 25; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        g.gamma_r = 0.9;
        PowerParams par;
        par.beta_r = (i % 2) ? 3.0 : kInf;
        auto prior = solve_prior_backward(g);
        auto ref = oracle::solve_robot(g, oracle::solve_prior(g), par);
        auto sol = solve_robot_backward(g, prior, par);
        CHECK(robot_gap(g, sol, ref) < 1e-9);
    }
}

TEST_CASE("fixed point and backward agree; enumeration equals factorization") {
    std::mt19937_64 rng(202);
    for (int i = 0; i < 10; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        g.gamma_r = 0.8;
        PowerParams par;
        par.beta_r = 2.0;
        auto prior = solve_prior_backward(g);
        auto a = solve_robot_backward(g, prior, par);
        auto b = solve_robot_fixed_point(g, prior, par);
        RobotOptions en;
        en.enumerate_goals = true;
        auto c = solve_robot_backward(g, prior, par, en);
        for (std::size_t j = 0; j < a.v_r.size(); ++j) {
            CHECK(a.v_r[j] == doctest::Approx(b.v_r[j]).epsilon(1e-8));
            CHECK(a.v_r[j] == doctest::Approx(c.v_r[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("serial and parallel execution give identical tables") {
    std::mt19937_64 rng(303);
    Game g = oracle::random_acyclic_game(rng);
    PowerParams par;
    par.beta_r = 2.0;
    PriorOptions po;
    RobotOptions ro;
    po.exec = ExecPolicy::serial;
    ro.exec = ExecPolicy::serial;
    auto p1 = solve_prior_fixed_point(g, po);
    auto r1 = solve_robot_fixed_point(g, p1, par, ro);
    po.exec = ExecPolicy::parallel;
    ro.exec = ExecPolicy::parallel;
    auto p2 = solve_prior_fixed_point(g, po);
    auto r2 = solve_robot_fixed_point(g, p2, par, ro);
    CHECK(p1.v_m == p2.v_m);
    CHECK(r1.v_r == r2.v_r);
    CHECK(r1.pi_r == r2.pi_r);
}

TEST_CASE("terminal value accrues forever or once") {
    auto sc = build_self_harm_game();
    auto prior = solve_prior_fixed_point(sc.game, sc.prior_opt);
    RobotOptions o = sc.robot_opt;
    auto loop = solve_robot(sc.game, prior, sc.params, o);
    o.terminal = TerminalReward::once;
    auto once = solve_robot(sc.game, prior, sc.params, o);
    int sc_id = sc.game.state_index("s_c");
    CHECK(loop.v_r[sc_id] == doctest::Approx(loop.u_r[sc_id] / (1 - sc.game.gamma_r)));
    CHECK(once.v_r[sc_id] == doctest::Approx(once.u_r[sc_id]));
}

TEST_CASE("horizon bound shrinks by gamma_r per extra step") {
    PowerParams p = bounded_preset();
    auto b10 = horizon_bound(2, 0.9, p, 10);
    auto b11 = horizon_bound(2, 0.9, p, 11);
    CHECK(b11.bound == doctest::Approx(b10.bound * 0.9).epsilon(1e-14));
    CHECK(b10.bound > 0);
}

TEST_CASE("scale invariance of the robot policy at eps = 0") {
    std::mt19937_64 rng(404);
    for (int i = 0; i < 10; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        PowerParams par;
        par.beta_r = 2.0;
        auto prior = solve_prior_backward(g);
        auto sol = solve_robot_backward(g, prior, par);
        auto rep = scale_invariance_check(g, prior, sol, 0.37, par);
        CHECK(rep.invariant);
    }
}

TEST_CASE("power report carries bits") {
    auto sc = build_commitment_game();
    auto solved = solve_scenario(sc);
    auto rep = power_report(sc.game, solved.robot);
    REQUIRE(rep.x.size() == rep.w.size());
    for (std::size_t i = 0; i < rep.x.size(); ++i)
        if (rep.x[i] > 0) CHECK(rep.w[i] == doctest::Approx(std::log2(rep.x[i])));
}
