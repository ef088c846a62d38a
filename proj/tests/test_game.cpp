#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "powergame/game.hpp"
#include "powergame/scenarios.hpp"

using namespace pg;

namespace {

// s0 -> (s1 | s2), s1 -> s2 -> t; goals parameterized by the caller
GameBuilder chain() {
    GameBuilder b("chain");
    int h = b.add_human("h", 0.9);
    int s0 = b.add_state("s0", false, true);
    int s1 = b.add_state("s1");
    int s2 = b.add_state("s2");
    int t = b.add_state("t", true);
    b.set_robot_actions(s0, {"a", "b"});
    b.set_human_actions(s0, h, {"x"});
    b.set_transition(s0, 0, {0}, {{s1, 1.0}});
    b.set_transition(s0, 1, {0}, {{s2, 1.0}});
    b.set_robot_actions(s1, {"go"});
    b.set_human_actions(s1, h, {"x"});
    b.set_transition(s1, 0, {0}, {{s2, 1.0}});
    b.set_robot_actions(s2, {"go"});
    b.set_human_actions(s2, h, {"x"});
    b.set_transition(s2, 0, {0}, {{t, 1.0}});
    return b;
}

bool has_kind(const ValidationReport& r, const std::string& k) {
    return std::any_of(r.issues.begin(), r.issues.end(), [&](auto& i) { return i.kind == k; });
}

}  // namespace

TEST_CASE("builder lays out joint rows robot-major") {
    GameBuilder b("two");
    int h0 = b.add_human("a", 0.9), h1 = b.add_human("b", 0.9);
    int s0 = b.add_state("s0", false, true);
    int t = b.add_state("t", true);
    b.set_robot_actions(s0, {"r0", "r1"});
    b.set_human_actions(s0, h0, {"x", "y"});
    b.set_human_actions(s0, h1, {"u", "v", "w"});
    for (int ar = 0; ar < 2; ++ar)
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 3; ++c) b.set_transition(s0, ar, {a, c}, {{t, 1.0}});
    b.add_goal(h0, "t", {t});
    b.add_goal(h1, "t", {t});
    Game g = b.build();
    CHECK(g.num_joint(s0) == 12);
    CHECK(g.human_profiles(s0) == 6);
    int ah[2] = {1, 2};
    CHECK(g.profile_index(s0, ah) == 5);
    int back[2];
    g.decode_profile(s0, 4, back);
    CHECK(back[0] == 1);
    CHECK(back[1] == 1);
    CHECK(validate_game(g).ok());
    CHECK(g.num_robot(t) == 1);  // terminals get a single pass action
}

TEST_CASE("mutually reachable goal states are rejected with a witness path") {
    auto b = chain();
    b.add_goal(0, "g", {1, 2});
    Game g = b.build();
    auto rep = validate_game(g);
    REQUIRE(has_kind(rep, "goal_mutually_reachable"));
    auto it = std::find_if(rep.issues.begin(), rep.issues.end(), [](auto& i) { return i.kind == "goal_mutually_reachable"; });
    CHECK(it->witness.front() == 1);
    CHECK(it->witness.back() == 2);
    g.absorption = Absorption::first_entry;
    CHECK_FALSE(has_kind(validate_game(g), "goal_mutually_reachable"));
}

TEST_CASE("goal cover violations are found") {
    auto b = chain();
    b.add_goal(0, "g", {1});
    auto rep = validate_game(b.build());
    CHECK(has_kind(rep, "goal_cover"));
}

TEST_CASE("row normalization and probability checks") {
    auto b = chain();
    b.add_goal(0, "g", {3});
    Game g = b.build();
    CHECK(validate_game(g).ok());
    g.trans[g.row_ptr[g.joint_offset[0]]].prob = 0.9;
    CHECK(has_kind(validate_game(g), "row_not_normalized"));
    g.trans[g.row_ptr[g.joint_offset[0]]].prob = -1.0;
    CHECK(has_kind(validate_game(g), "negative_probability"));
}

TEST_CASE("gamma_h = 1 only on acyclic games") {
    auto b = chain();
    b.add_goal(0, "g", {3});
    Game g = b.build();
    g.gamma_h[0] = 1.0;
    CHECK(validate_game(g).ok());
    auto bif = build_bifurcation_mdp();
    bif.game.gamma_h[0] = 1.0;
    CHECK(has_kind(validate_game(bif.game), "gamma"));
}

TEST_CASE("behavior parameter checks") {
    auto b = chain();
    int g0 = b.add_goal(0, "g", {3});
    b.behavior(0, 0, g0).nu = 1.5;
    CHECK(has_kind(validate_game(b.build()), "bad_nu"));
}

TEST_CASE("acyclicity and topological order") {
    auto b = chain();
    b.add_goal(0, "g", {3});
    Game g = b.build();
    auto order = is_acyclic(g);
    REQUIRE(order);
    std::vector<int> pos(g.num_states());
    for (std::size_t i = 0; i < order->size(); ++i) pos[(*order)[i]] = static_cast<int>(i);
    CHECK(pos[0] < pos[1]);
    CHECK(pos[1] < pos[2]);
    CHECK(pos[2] < pos[3]);
    CHECK_FALSE(is_acyclic(build_bifurcation_mdp().game));
}

TEST_CASE("restricting robot actions keeps rows aligned") {
    auto b = chain();
    b.add_goal(0, "g", {3});
    Game g = b.build();
    Game r = restrict_robot_actions(g, 0, {1});
    REQUIRE(r.num_robot(0) == 1);
    CHECK(r.robot_actions[0][0] == "b");
    CHECK(r.row(0, 0)[0].next == 2);
    CHECK(validate_game(r).ok());
}

TEST_CASE("reachability") {
    auto b = chain();
    b.add_goal(0, "g", {3});
    Game g = b.build();
    auto r = reachable_states(g, {1});
    CHECK_FALSE(r[0]);
    CHECK(r[1]);
    CHECK(r[3]);
    CHECK(reachable_goal_indicator(g, 0, 0, 0) == 0);
    CHECK(reachable_goal_indicator(g, 0, 0, 3) == 1);
    CHECK_THROWS_AS(reachable_goal_indicator(g, 0, 1, 3), Error);
}

TEST_CASE("every generated random game validates and is acyclic") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 50; ++i) {
        Game g = oracle::random_acyclic_game(rng);
        CHECK(validate_game(g).ok());
        CHECK(is_acyclic(g).has_value());
        CHECK(g.num_states() <= 10);
    }
}

TEST_CASE("every built scenario validates") {
    for (auto& name : scenario_names()) {
        auto sc = build_named_scenario(name, {});
        auto rep = validate_game(sc.game);
        INFO(name << ": " << rep.summary());
        CHECK(rep.ok());
    }
}
