#include <doctest.h>

#include <cmath>

#include "powergame/scenarios.hpp"

using namespace pg;

TEST_CASE("analytic checks of every closed-form scenario") {
    for (auto& name : scenario_names()) {
        if (name == "gridworld") continue;
        auto rep = check_named_scenario(name, {});
        for (auto& c : rep.checks) {
            INFO(name << " " << c.quantity << " oracle " << c.oracle << " solver " << c.solver);
            CHECK(c.match);
        }
    }
}

TEST_CASE("scenario overrides are parsed and unknown keys rejected") {
    auto sc = build_named_scenario("confirmation", {{"gamma_h", "0.5"}});
    CHECK(sc.game.gamma_h[0] == 0.5);
    CHECK_THROWS_AS(build_named_scenario("confirmation", {{"bogus", "1"}}), Error);
    CHECK_THROWS_AS(build_named_scenario("nope", {}), Error);
    CHECK_THROWS_AS(check_named_scenario("gridworld", {}), Error);
}

TEST_CASE("commitment game values") {
    auto sc = build_commitment_game();
    auto sol = solve_scenario(sc);
    int s1 = sc.game.state_index("s1");
    REQUIRE(s1 >= 0);
    CHECK(sol.robot.x(0, s1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("menu closed form against brute force") {
    for (double beta : {0.5, 1.0, std::log(3.0), 2.0})
        for (double zeta : {1.5, 2.0, 3.0}) {
            MenuParams p;
            p.beta_h = beta;
            p.zeta = zeta;
            CHECK(std::abs(menu_bruteforce_k(p) - menu_approx_k(beta, zeta)) <= 1.0 + 1e-9);
        }
}

TEST_CASE("confirmation asks back twice, impatient human once") {
    ConfirmationParams p;
    CHECK(confirmation_formula_k(p) == 3);
    p.gamma_h = 0.5;
    CHECK(confirmation_formula_k(p) == 1);
    p = ConfirmationParams{};
    p.timing = ConfirmationTiming::sequential;
    CHECK(confirmation_formula_k(p) == 2);
}

TEST_CASE("resource split shares") {
    ResourceParams p;
    CHECK(resource_formula_split(p) == 0.0);  // one human takes everything
    p.f_name = "sqrt";
    CHECK(resource_formula_split(p) == doctest::Approx(0.5));
    p.f_name = "square_log";
    CHECK(resource_formula_split(p) == doctest::Approx(0.14).epsilon(0.08));
}

TEST_CASE("self-harm threshold scales with v") {
    SelfHarmParams p;
    for (double v : {0.1, 0.5, 0.9}) {
        p.v = v;
        double t = self_harm_threshold_p(p);
        CHECK(t > v / 2e6);
        CHECK(t < v * 2 / 1e6);
    }
}

TEST_CASE("belief manipulation formulas") {
    BeliefParams p;
    CHECK(belief_u_dd(p) == doctest::Approx(-8.0 / 3.0).epsilon(1e-14));
    CHECK(belief_u_cd(p) == doctest::Approx(-4.0).epsilon(1e-14));
}

TEST_CASE("bifurcation roots satisfy the scalar fixed-point equation") {
    // p = sigmoid(beta (Q0 - Q1)) with Q0 - Q1 = 1 / (1 - gamma p)
    for (double beta : {0.1, 0.275, 0.5}) {
        auto roots = bifurcation_roots(beta, 0.99);
        REQUIRE_FALSE(roots.empty());
        for (double p : roots) {
            double rhs = 1 / (1 + std::exp(-beta / (1 - 0.99 * p)));
            CHECK(p == doctest::Approx(rhs).epsilon(1e-6));
        }
    }
    auto at = bifurcation_roots(0.275, 0.99);
    CHECK(at.size() == 3);
    auto folds = bifurcation_folds(0.99);
    REQUIRE(folds.size() == 2);
    CHECK(folds[0] == doctest::Approx(0.0744).epsilon(0.01));
    CHECK(folds[1] == doctest::Approx(0.2887).epsilon(0.01));
}

TEST_CASE("boxes: robot opens what the human can read") {
    auto rep = check_boxes();
    CHECK(rep.all_match());
}
