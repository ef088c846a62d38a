#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "powergame/common.hpp"

namespace pg {

enum class RobotPolicyForm { power_law, normalized_softmax };

struct PowerParams {
    double zeta = 2.0;
    double xi = 1.0;
    double eta = 1.1;
    double beta_r = kInf;
    double eps_x = 0.0;
    double eps_q = 0.0;
    std::optional<int> horizon;
    RobotPolicyForm form = RobotPolicyForm::power_law;
    bool permissive = false;  // allows zeta > 0, xi > 0 for empowerment comparisons
};

// eps_X = 1 with xi >= log 2 / (log 3 - log 2) keeps U_r bounded near X = 0
PowerParams bounded_preset();

void check_params(const PowerParams& p);

// X_h = sum_g v_g^zeta
double goal_aggregate(std::span<const double> values, double zeta);
inline double power_bits(double x) { return std::log2(x); }

// U_r = -(sum_h (X_h + eps_X)^-xi)^eta, evaluated through a log-sum-exp
double intrinsic_reward(std::span<const double> x_values, const PowerParams& p);

struct PowerReport {
    std::vector<std::string> state_names;
    std::vector<std::string> human_names;
    std::vector<double> x;    // s * H + h
    std::vector<double> w;    // bits
    std::vector<double> u_r;  // per state
};

struct BanditResult {
    double e_zeta = 0.0;  // bits
    double w = 0.0;       // bits
    std::vector<double> policy;
    bool bound_holds = true;
};

struct BanditOptions {
    int starts = 64;
    int iterations = 500;
    double step = 0.1;
    std::uint64_t seed = 7;
    double tol = 1e-6;
};

// rows[a][s] = P(s | a)
double bandit_objective(const std::vector<std::vector<double>>& rows, std::span<const double> pi, double zeta);
double bandit_w(const std::vector<std::vector<double>>& rows, double zeta);
BanditResult bandit_empowerment(const std::vector<std::vector<double>>& rows, double zeta, const BanditOptions& opt = {});

// Euclidean projection onto the probability simplex
void project_simplex(std::vector<double>& v);

}  // namespace pg
