#pragma once

#include <span>
#include <vector>

#include "powergame/game.hpp"
#include "powergame/human_prior.hpp"
#include "powergame/power.hpp"

namespace pg {

// Terminal robot value: U_r accrues forever on the self-loop, or once.
enum class TerminalReward { self_loop, once };

struct RobotSolution {
    int num_states = 0;
    int num_humans = 0;
    std::vector<int> goal_offset;
    std::vector<std::size_t> robot_offset;  // S + 1
    std::vector<double> q_r;                // robot_offset[s] + a
    std::vector<double> pi_r;
    std::vector<double> v_e;  // flat goal * S + s
    std::vector<double> x_h;  // h * S + s
    std::vector<double> u_r;
    std::vector<double> v_r;
    double residual = 0.0;
    double beta_reached = 0.0;

    std::span<const double> q(int s) const { return {q_r.data() + robot_offset[s], robot_offset[s + 1] - robot_offset[s]}; }
    std::span<const double> pi(int s) const { return {pi_r.data() + robot_offset[s], robot_offset[s + 1] - robot_offset[s]}; }
    double ve(int h, int g, int s) const { return v_e[static_cast<std::size_t>(goal_offset[h] + g) * num_states + s]; }
    double x(int h, int s) const { return x_h[static_cast<std::size_t>(h) * num_states + s]; }
};

RobotSolution make_robot_layout(const Game& game);

struct RobotOptions {
    double damping = 0.5;
    int schedule_steps = 16;
    std::vector<double> beta_schedule;  // scale factors from 0 to 1
    double tol = 1e-10;
    long max_iter = 100000;
    FixedPointMap map = FixedPointMap::evaluate;
    TerminalReward terminal = TerminalReward::self_loop;
    bool enumerate_goals = false;  // full goal-profile expectation instead of factorized
    ExecPolicy exec = ExecPolicy::parallel;
};

RobotSolution solve_robot_backward(const Game& game, const HumanPrior& prior, const PowerParams& params,
                                   const RobotOptions& opt = {});
RobotSolution solve_robot_fixed_point(const Game& game, const HumanPrior& prior, const PowerParams& params,
                                      const RobotOptions& opt = {});
// backward induction when acyclic, continuation otherwise
RobotSolution solve_robot(const Game& game, const HumanPrior& prior, const PowerParams& params,
                          const RobotOptions& opt = {});

struct HorizonBound {
    int horizon = 0;
    double bound = 0.0;
    double m_u = 0.0;
    double eps_x = 0.0;
    double eps_q = 0.0;
    bool normalized = false;
};

HorizonBound horizon_bound(int num_humans, double gamma_r, const PowerParams& params, int horizon);

struct FiniteHorizonResult {
    RobotSolution solution;
    HorizonBound bound;
};

FiniteHorizonResult finite_horizon_solve(const Game& game, const HumanPrior& prior, const PowerParams& params,
                                         const RobotOptions& opt = {});

// V^e, X, U_r and V_r for a hand-fixed robot policy (laid out like RobotSolution::pi_r)
RobotSolution evaluate_policy_power(const Game& game, const HumanPrior& prior, const PowerParams& params,
                                    const std::vector<double>& pi_r, const RobotOptions& opt = {});

PowerReport power_report(const Game& game, const RobotSolution& sol);

struct ScaleReport {
    double b = 1.0;
    double max_policy_diff = 0.0;
    std::vector<int> mismatched;  // states whose policy changed
    std::vector<int> exempt;      // mismatches at states with some X_h < 10 when eps_X > 0
    bool invariant = true;
};

// Scales all V^e by b, recomputes X, U_r, V_r (fixed pi_r), Q_r and pi_r, and compares pi_r.
ScaleReport scale_invariance_check(const Game& game, const HumanPrior& prior, const RobotSolution& sol,
                                   double b, const PowerParams& params, const RobotOptions& opt = {});

}  // namespace pg
