#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "powergame/policy.hpp"
#include "powergame/power.hpp"

using namespace pg;

TEST_CASE("goal aggregate and bits") {
    std::vector<double> v{0.5, 0.5, 0.0};
    CHECK(goal_aggregate(v, 2.0) == doctest::Approx(0.5));
    CHECK(goal_aggregate(v, 1.0) == doctest::Approx(1.0));
    CHECK(power_bits(8.0) == doctest::Approx(3.0));
}

TEST_CASE("intrinsic reward closed form") {
    PowerParams p;
    p.xi = 1.0;
    p.eta = 1.0;
    std::vector<double> x{2.0, 4.0};
    CHECK(intrinsic_reward(x, p) == doctest::Approx(-0.75));
    p.eta = 2.0;
    CHECK(intrinsic_reward(x, p) == doctest::Approx(-0.5625));
    // log-sum-exp path keeps tiny X finite
    std::vector<double> tiny{1e-200, 1.0};
    p.eta = 1.0;
    CHECK(std::isfinite(intrinsic_reward(tiny, p)));
    std::vector<double> zero{0.0};
    CHECK_THROWS_AS(intrinsic_reward(zero, p), Error);
    p.eps_x = 1.0;
    CHECK(intrinsic_reward(zero, p) == doctest::Approx(-1.0));
}

TEST_CASE("parameter checks") {
    PowerParams p;
    CHECK_NOTHROW(check_params(p));
    p.zeta = 0.5;
    CHECK_THROWS_AS(check_params(p), Error);
    p = PowerParams{};
    p.eta = 0.5;
    CHECK_THROWS_AS(check_params(p), Error);
    CHECK_NOTHROW(check_params(bounded_preset()));
}

TEST_CASE("softmax and human policy mixture") {
    std::vector<double> q{1.0, 0.0}, out(2);
    softmax_policy(q, 0.0, out);
    CHECK(out[0] == doctest::Approx(0.5));
    softmax_policy(q, std::log(3.0), out);
    CHECK(out[0] == doctest::Approx(0.75));
    softmax_policy(q, kInf, out);
    CHECK(out[0] == 1.0);
    std::vector<double> tie{1.0, 1.0}, t2(2);
    softmax_policy(tie, kInf, t2);
    CHECK(t2[0] == 0.5);
    BehaviorParams b;
    b.nu = 0.5;
    b.beta = kInf;
    b.pi0 = {0.0, 1.0};
    human_policy(q, b, out);
    CHECK(out[0] == doctest::Approx(0.5));
    CHECK(out[1] == doctest::Approx(0.5));
}

TEST_CASE("power-law robot policy") {
    PowerParams p;
    p.beta_r = 1.0;
    std::vector<double> q{-1.0, -3.0}, out(2);
    robot_policy(q, p, out);
    CHECK(out[0] == doctest::Approx(0.75));
    // scale invariance at eps_Q = 0
    std::vector<double> q2{-10.0, -30.0}, out2(2);
    robot_policy(q2, p, out2);
    CHECK(out2[0] == doctest::Approx(out[0]));
    std::vector<double> zero{0.0, -1.0};
    CHECK_THROWS_AS(robot_policy(zero, p, out), Error);
    p.eps_q = 1.0;
    CHECK_NOTHROW(robot_policy(zero, p, out));
}

TEST_CASE("simplex projection") {
    std::vector<double> v{0.8, 0.8, -0.2};
    project_simplex(v);
    CHECK(v[0] == doctest::Approx(0.5));
    CHECK(v[1] == doctest::Approx(0.5));
    CHECK(v[2] == 0.0);
}

TEST_CASE("bandit: identity channel attains W at zeta = 1") {
    std::vector<std::vector<double>> id{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    auto r = bandit_empowerment(id, 1.0);
    CHECK(r.w == doctest::Approx(std::log2(3.0)));
    CHECK(r.e_zeta == doctest::Approx(r.w).epsilon(1e-6));
}

TEST_CASE("bandit: E^zeta never exceeds W on random channels") {
    std::mt19937_64 rng(77);
    std::gamma_distribution<double> gam(0.5, 1.0);
    BanditOptions opt;
    opt.starts = 8;
    for (double zeta : {1.0, 1.5, 2.0})
        for (int i = 0; i < 40; ++i) {
            int A = 2 + static_cast<int>(rng() % 3), S = 2 + static_cast<int>(rng() % 3);
            std::vector<std::vector<double>> rows(A, std::vector<double>(S));
            for (auto& r : rows) {
                double z = 0;
                for (auto& x : r) z += (x = gam(rng));
                for (auto& x : r) x /= z;
            }
            auto res = bandit_empowerment(rows, zeta, opt);
            CHECK(res.e_zeta <= res.w + 1e-6);
        }
}
