#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "powergame/gridworld.hpp"
#include "powergame/scenarios.hpp"
#include "powergame/td_learner.hpp"

using namespace pg;

TEST_CASE("single-sample X estimator is unbiased under a uniform goal draw") {
    std::vector<double> ve{0.2, 0.5, 0.9};
    double mean = 0;
    for (int g = 0; g < 3; ++g) mean += x_h_estimator(ve, g, 2.0) / 3;
    CHECK(mean == doctest::Approx(0.04 + 0.25 + 0.81));
}

TEST_CASE("exploration bonus decays geometrically") {
    CHECK(exploration_bonus(0, 50, 0.995) == 50.0);
    CHECK(exploration_bonus(2, 50, 0.5) == doctest::Approx(12.5));
}

TEST_CASE("schedule presets") {
    auto t = reference_schedule("default");
    CHECK(t.beta_r_start == 0.1);
    CHECK(t.eps_h_start == 0.8);
    CHECK(reference_schedule("beta_r_from_one").beta_r_start == 1.0);
    CHECK(reference_schedule("eps_h_from_one").eps_h_start == 1.0);
    CHECK_THROWS_AS(reference_schedule("nope"), Error);
}

namespace {

double ve_gap_reachable(const Game& g, const RobotSolution& a, const RobotSolution& b) {
    auto reach = reachable_states(g, g.initial);
    double d = 0;
    for (int s = 0; s < g.num_states(); ++s) {
        if (!reach[s]) continue;
        for (int h = 0; h < g.num_humans(); ++h)
            for (int k = 0; k < g.num_goals(h); ++k) d = std::max(d, std::abs(a.ve(h, k, s) - b.ve(h, k, s)));
    }
    return d;
}

}  // namespace

TEST_CASE("phase 2 recovers exact effective values on a small random game") {
    std::mt19937_64 rng(4);
    Game g = oracle::random_acyclic_game(rng);
    g.gamma_r = 0.5;
    PowerParams par;
    par.beta_r = 2.0;
    auto prior = solve_prior_backward(g);
    auto exact = solve_robot_backward(g, prior, par);
    LearnSchedule s;
    s.episodes = 100000;
    s.max_steps = 20;
    s.alpha_e = s.alpha_r = s.alpha_x = 0.05;
    s.alpha_end_factor = 0.05;
    s.eps_h_start = s.eps_h_end = 0.0;  // exact values assume the prior's human policy
    s.seed = 3;
    auto res = phase2_learn(g, prior, par, s);
    CHECK(ve_gap_reachable(g, res.solution, exact) < 0.05);
    CHECK(res.returns.size() == 100000);
    CHECK(res.td_curve.size() == 100000);
    CHECK_FALSE(res.ve_excursion);
}

TEST_CASE("phase 2 is deterministic per seed") {
    auto sc = build_commitment_game();
    auto prior = solve_prior_fixed_point(sc.game, sc.prior_opt);
    LearnSchedule s;
    s.episodes = 300;
    s.max_steps = 10;
    s.trace_stride = 100;
    PowerParams p = sc.params;
    p.beta_r = 2.0;
    auto a = phase2_learn(sc.game, prior, p, s);
    auto b = phase2_learn(sc.game, prior, p, s);
    CHECK(a.solution.q_r == b.solution.q_r);
    CHECK(a.returns == b.returns);
    CHECK(a.traces.size() == 4);  // episodes 0, 100, 200 and the final one
    s.seed = 99;
    auto c = phase2_learn(sc.game, prior, p, s);
    CHECK(a.returns != c.returns);
}

TEST_CASE("actor-critic mode produces a proper policy") {
    auto sc = build_commitment_game();
    auto prior = solve_prior_fixed_point(sc.game, sc.prior_opt);
    LearnSchedule s;
    s.mode = LearnMode::actor_critic;
    s.episodes = 500;
    s.max_steps = 10;
    PowerParams p = sc.params;
    p.beta_r = 2.0;
    auto res = phase2_learn(sc.game, prior, p, s);
    for (int st = 0; st < sc.game.num_states(); ++st) {
        double z = 0;
        for (double x : res.solution.pi(st)) z += x;
        CHECK(z == doctest::Approx(1.0));
    }
}

TEST_CASE("table X mode matches the sampled mode's target in expectation") {
    std::mt19937_64 rng(8);
    Game g = oracle::random_acyclic_game(rng);
    g.gamma_r = 0.5;
    PowerParams par;
    par.beta_r = 2.0;
    auto prior = solve_prior_backward(g);
    auto exact = solve_robot_backward(g, prior, par);
    LearnSchedule s;
    s.episodes = 100000;
    s.max_steps = 20;
    s.alpha_e = s.alpha_r = s.alpha_x = 0.05;
    s.alpha_end_factor = 0.05;
    s.eps_h_start = s.eps_h_end = 0.0;
    s.x_mode = XMode::table;
    auto res = phase2_learn(g, prior, par, s);
    CHECK(ve_gap_reachable(g, res.solution, exact) < 0.05);
}

TEST_CASE("gridworld layout and events") {
    auto cfg = default_gridworld_config();
    auto lay = parse_grid(cfg);
    CHECK(lay.width > 0);
    auto sc = build_gridworld(cfg);
    CHECK(validate_game(sc.game).ok());
    int s0 = sc.game.initial.front();
    auto st = grid_state(sc.game, s0);
    CHECK(st.key == 0);
    CHECK(grid_state_id(sc.game, st) == s0);
    GridworldConfig bad = cfg;
    bad.rows = {"###", "#H#", "###"};
    CHECK_THROWS_AS(parse_grid(bad), Error);
}
