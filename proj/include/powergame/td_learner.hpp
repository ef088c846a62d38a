#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "powergame/game.hpp"
#include "powergame/human_prior.hpp"
#include "powergame/power.hpp"
#include "powergame/robot_planner.hpp"

namespace pg {

enum class LearnMode { dqn, actor_critic };

// sampled: x_h tracks |G_h| V^e(s, g_h)^zeta for the goal being pursued.
// table: X_h(s) is summed over the current v_e row every time it is needed.
enum class XMode { sampled, table };

struct LearnSchedule {
    LearnMode mode = LearnMode::dqn;
    long episodes = 3000;
    int max_steps = 200;
    double alpha_e = 0.1;
    double alpha_r = 0.1;
    double alpha_x = 0.1;
    XMode x_mode = XMode::sampled;
    double alpha_end_factor = 1.0;  // rates decay geometrically to alpha * factor over the episodes
    double beta_r_start = 0.1;  // annealed linearly to params.beta_r
    double eps_h_start = 0.8;
    double eps_h_end = 0.1;
    double p_g = 0.01;  // per-step goal redraw
    double bonus_robot_init = 50.0;
    double bonus_robot_decay = 0.995;
    bool exploring_starts = false;
    bool harmonic_rate = false;  // alpha / (1 + visits / rate_scale)
    double rate_scale = 10.0;
    double eps_floor = 1e-6;  // lower bound on eps_X and eps_Q while learning; exact solvers keep 0
    int trace_stride = 0;  // record every n-th episode (0: only the last)
    std::uint64_t seed = 12;
};

// "beta_r_from_one" starts the anneal at 1 instead of 0.1
LearnSchedule reference_schedule(const std::string& preset = "default");

struct TraceStep {
    int t = 0;
    int s = 0;
    std::vector<int> goals;  // per human
    int a_r = 0;
    std::vector<int> a_h;
    int s2 = 0;
    double u_r = 0.0;             // U_r(s')
    std::vector<double> w_h;      // W_h(s') per human, bits
};

struct EpisodeTrace {
    long episode = 0;
    std::vector<TraceStep> steps;
    double ret = 0.0;  // undiscounted sum of U_r
};

struct Phase2Result {
    RobotSolution solution;
    std::vector<EpisodeTrace> traces;
    std::vector<double> td_curve;  // mean |TD| of the robot update per episode
    std::vector<double> returns;   // per episode
    double max_ve = 0.0;           // largest v_e estimate seen (values above 1 + alpha are flagged)
    bool ve_excursion = false;
    long steps = 0;
};

Phase2Result phase2_learn(const Game& game, const HumanPrior& prior, const PowerParams& params,
                          const LearnSchedule& schedule, TerminalReward terminal = TerminalReward::self_loop);

// single-sample X target |G_h| V^e(s, g)^zeta
double x_h_estimator(std::span<const double> ve_hs, int sampled_goal, double zeta);

inline double exploration_bonus(long count, double init, double decay) {
    return init * std::pow(decay, static_cast<double>(count));
}

}  // namespace pg
