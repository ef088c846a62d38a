#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "powergame/game.hpp"
#include "powergame/power.hpp"

namespace pg {

// relative tolerance used to decide argmax ties
inline double tie_tol(double m) { return 1e-11 * std::max(1.0, std::abs(m)); }

// beta-softmax; beta = inf gives the uniform argmax
void softmax_policy(std::span<const double> q, double beta, std::span<double> out);

// nu * pi0 + (1 - nu) * softmax_beta(q)
void human_policy(std::span<const double> q, const BehaviorParams& b, std::span<double> out);

// pi(a) ~ (-Q(a) + eps_Q)^-beta_r, or the normalized-softmax variant
void robot_policy(std::span<const double> q, const PowerParams& p, std::span<double> out);

// log-space weights for the power-law policy, for callers adding bonuses
double power_law_logit(double q, double beta_r, double eps_q);

}  // namespace pg
