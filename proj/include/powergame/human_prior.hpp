#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "powergame/game.hpp"

namespace pg {

// How the human models the robot inside Q^m: worst case over A_r(s), or a uniform robot
// (the latter only for the "E instead of min" ablation).
enum class AdversaryModel { min, mean };

// evaluate: V -> pi(Q(V)) -> robust policy evaluation. sweep: one Bellman step.
enum class FixedPointMap { evaluate, sweep };

struct FoldReport {
    int human = -1;
    int goal = -1;
    double scale = 0.0;  // continuation parameter t in [0,1]
    double beta = 0.0;   // t times the largest finite target beta
    double jump = 0.0;
};

struct HumanPrior {
    int num_states = 0;
    int num_humans = 0;
    std::vector<int> goal_offset;
    std::vector<std::vector<std::size_t>> action_offset;  // [h][s], S + 1 entries
    std::vector<std::vector<double>> q_m;                 // [flat goal][action_offset[h][s] + a]
    std::vector<std::vector<double>> pi_h;
    std::vector<double> v_m;  // flat goal * S + s
    double residual = 0.0;
    std::vector<FoldReport> folds;

    int flat(int h, int g) const { return goal_offset[h] + g; }
    std::span<const double> q(int h, int g, int s) const {
        const auto& o = action_offset[h];
        return {q_m[flat(h, g)].data() + o[s], o[s + 1] - o[s]};
    }
    std::span<const double> pi(int h, int g, int s) const {
        const auto& o = action_offset[h];
        return {pi_h[flat(h, g)].data() + o[s], o[s + 1] - o[s]};
    }
    double v(int h, int g, int s) const { return v_m[static_cast<std::size_t>(flat(h, g)) * num_states + s]; }
};

// empty prior with the game's table layout
HumanPrior make_prior_layout(const Game& game);

struct PriorOptions {
    AdversaryModel adversary = AdversaryModel::min;
    FixedPointMap map = FixedPointMap::evaluate;
    double damping = 0.5;
    int schedule_steps = 32;
    std::vector<double> beta_schedule;  // explicit scale factors t_k, nondecreasing from 0 to 1
    double tol = 1e-10;
    long max_iter = 100000;
    bool detect_folds = true;
    double fold_jump = 0.05;
    ExecPolicy exec = ExecPolicy::parallel;
};

std::vector<double> default_schedule(int steps);

HumanPrior solve_prior_backward(const Game& game, const PriorOptions& opt = {});
HumanPrior solve_prior_fixed_point(const Game& game, const PriorOptions& opt = {});

// one evaluation of eq. (1) for pair (h, g) given V^m; q laid out by action_offset[h]
void prior_q_from_v(const Game& game, int h, int g, std::span<const double> v, AdversaryModel adv,
                    const std::vector<std::size_t>& action_offset, std::vector<double>& q);

// continuation value weight u(s') + gamma c(s') V(s')
inline double prior_backup(const Game& game, int h, int g, int s2, double v2) {
    double u = game.member(h, g, s2) ? 1.0 : 0.0;
    return goal_absorbs(game, h, g, s2) ? u : u + game.gamma_h[h] * v2;
}

// ---------------------------------------------------------------- phase 1 learning

enum class Potential { none, manhattan };

// U_h(s', g) + gamma_h Phi(s', g) - Phi(s, g)
double shaped_reward(const Game& game, int h, int g, int s, int s2, Potential potential);
double potential_value(const Game& game, int h, int g, int s, Potential potential);

struct Phase1Schedule {
    long episodes = 3000;
    int max_steps = 200;
    double alpha_m = 0.1;
    double alpha_end_factor = 1.0;  // geometric decay of alpha_m over the episodes
    bool harmonic_rate = false;  // alpha / (1 + visits / rate_scale)
    double rate_scale = 10.0;
    double eps_h_start = 0.8;
    double eps_h_end = 0.1;
    double eps_r_start = 1.0;
    double eps_r_end = 0.01;
    int target_period = 50;
    double bonus_init = 75.0;
    double bonus_decay = 0.998;
    bool exploring_starts = true;
    Potential potential = Potential::none;
};

struct Phase1Result {
    int human = 0;
    int goal = 0;
    std::vector<double> q;         // unshaped, layout action_offset[h]
    std::vector<double> td_curve;  // mean |TD| per episode
    long steps = 0;
};

Phase1Result phase1_learn(const Game& game, int h, int g, const Phase1Schedule& sched, std::uint64_t seed);

// prior built from learned q tables (one per flat goal); terminal rows follow the model
HumanPrior prior_from_q(const Game& game, const std::vector<Phase1Result>& tables);

// all (h, g) pairs, seeds derived from `seed`; pairs run in parallel
HumanPrior phase1_learn_all(const Game& game, const Phase1Schedule& sched, std::uint64_t seed,
                            ExecPolicy exec = ExecPolicy::parallel, std::vector<Phase1Result>* raw = nullptr);

}  // namespace pg
