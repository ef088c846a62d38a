#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "powergame/human_prior.hpp"
#include "powergame/scenarios.hpp"

using namespace pg;

TEST_CASE("backward prior matches the brute-force reference") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 30; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        auto ref = oracle::solve_prior(g);
        auto pr = solve_prior_backward(g);
        for (int h = 0; h < g.num_humans(); ++h)
            for (int k = 0; k < g.num_goals(h); ++k)
                for (int s = 0; s < g.num_states(); ++s) {
                    CHECK(pr.v(h, k, s) == doctest::Approx(ref.v[h][k][s]).epsilon(1e-12));
                    auto q = pr.q(h, k, s);
                    for (std::size_t a = 0; a < q.size(); ++a) {
                        CHECK(q[a] == doctest::Approx(ref.q[h][k][s][a]).epsilon(1e-12));
                        CHECK(pr.pi(h, k, s)[a] == doctest::Approx(ref.pi[h][k][s][a]).epsilon(1e-12));
                    }
                }
    }
}

TEST_CASE("mean adversary ablation matches the reference") {
    std::mt19937_64 rng(12);
    PriorOptions o;
    o.adversary = AdversaryModel::mean;
    for (int i = 0; i < 10; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        auto ref = oracle::solve_prior(g, true);
        auto pr = solve_prior_backward(g, o);
        for (int h = 0; h < g.num_humans(); ++h)
            for (int k = 0; k < g.num_goals(h); ++k)
                for (int s = 0; s < g.num_states(); ++s)
                    CHECK(pr.v(h, k, s) == doctest::Approx(ref.v[h][k][s]).epsilon(1e-12));
    }
}

TEST_CASE("fixed-point prior agrees with backward induction on acyclic games") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 10; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        auto a = solve_prior_backward(g);
        auto b = solve_prior_fixed_point(g);
        for (std::size_t j = 0; j < a.v_m.size(); ++j) CHECK(a.v_m[j] == doctest::Approx(b.v_m[j]).epsilon(1e-8));
    }
}

TEST_CASE("literal sweep map reaches the same fixed point") {
    auto sc = build_commitment_game();
    PriorOptions o = sc.prior_opt;
    auto a = solve_prior_fixed_point(sc.game, o);
    o.map = FixedPointMap::sweep;
    auto b = solve_prior_fixed_point(sc.game, o);
    for (std::size_t j = 0; j < a.v_m.size(); ++j) CHECK(a.v_m[j] == doctest::Approx(b.v_m[j]).epsilon(1e-8));
}

TEST_CASE("bad beta schedules are rejected") {
    auto sc = build_bifurcation_mdp();
    PriorOptions o;
    o.beta_schedule = {0.5, 1.0};
    CHECK_THROWS_AS(solve_prior_fixed_point(sc.game, o), Error);
    CHECK_THROWS_AS(solve_prior_backward(sc.game), Error);  // cyclic
}

TEST_CASE("prior backup follows the absorption mode") {
    GameBuilder b("tiny");
    int h = b.add_human("h", 0.9);
    int s0 = b.add_state("s0", false, true);
    int s1 = b.add_state("s1");
    int s2 = b.add_state("s2", true);
    b.set_robot_actions(s0, {"go"});
    b.set_human_actions(s0, h, {"go"});
    b.set_transition(s0, 0, {0}, {{s1, 1.0}});
    b.set_robot_actions(s1, {"go"});
    b.set_human_actions(s1, h, {"go"});
    b.set_transition(s1, 0, {0}, {{s2, 1.0}});
    b.add_goal(h, "g", {s1, s2});
    Game g = b.build();
    g.absorption = Absorption::terminal;
    CHECK(prior_backup(g, 0, 0, s1, 0.5) == doctest::Approx(1.45));
    CHECK(prior_backup(g, 0, 0, s2, 0.5) == doctest::Approx(1.0));
    g.absorption = Absorption::first_entry;
    CHECK(prior_backup(g, 0, 0, s1, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("phase 1 learning approaches the exact cautious values") {
    auto sc = build_commitment_game();
    auto exact = solve_prior_fixed_point(sc.game, sc.prior_opt);
    Phase1Schedule s;
    s.episodes = 4000;
    auto learned = phase1_learn_all(sc.game, s, 5, ExecPolicy::serial);
    int s0 = sc.game.initial.front();
    for (int k = 0; k < sc.game.num_goals(0); ++k) CHECK(learned.v(0, k, s0) == doctest::Approx(exact.v(0, k, s0)).epsilon(0.05));
}

TEST_CASE("shaping potential vanishes without geometry") {
    auto sc = build_commitment_game();
    CHECK(potential_value(sc.game, 0, 0, 0, Potential::none) == 0.0);
}
