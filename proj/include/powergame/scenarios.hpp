#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "powergame/game.hpp"
#include "powergame/human_prior.hpp"
#include "powergame/power.hpp"
#include "powergame/robot_planner.hpp"

namespace pg {

struct Check {
    std::string quantity;
    double oracle = 0.0;
    double solver = 0.0;
    double tol = 0.0;
    bool match = false;
};

struct ScenarioReport {
    std::string name;
    std::vector<Check> checks;
    void add(const std::string& q, double oracle, double solver, double tol);
    bool all_match() const;
};

struct Scenario {
    std::string name;
    Game game;
    PowerParams params;
    PriorOptions prior_opt;
    RobotOptions robot_opt;
    std::vector<std::pair<std::string, double>> oracle;  // closed-form expectations
};

struct Solved {
    HumanPrior prior;
    RobotSolution robot;
};

// exact prior + robot solve with the scenario's options
Solved solve_scenario(const Scenario& sc);

// ---------------------------------------------------------------- commitment

struct CommitmentParams {
    double zeta = 2.0;
    double beta_h = kInf;
    double beta_r = kInf;
    double gamma_r = 0.99;
    AdversaryModel adversary = AdversaryModel::min;
};
Scenario build_commitment_game(const CommitmentParams& p = {});
// after passing: A on button 1, B on button 2, coin flip when h passed
std::vector<double> commitment_contingent_plan(const Game& g);
std::vector<double> commitment_fixed_plan(const Game& g, const std::string& task);
ScenarioReport check_commitment(const CommitmentParams& p = {});

// ---------------------------------------------------------------- menu size

struct MenuParams {
    int k_max = 30;
    double beta_h = 1.0986122886681098;
    double zeta = 2.0;
    double gamma_r = 0.99;
};
Scenario build_menu_game(const MenuParams& p = {});
double menu_w(int k, double beta_h, double zeta);
int menu_bruteforce_k(const MenuParams& p);
double menu_approx_k(double beta_h, double zeta);
int menu_solver_k(const Scenario& sc, const RobotSolution& sol);
ScenarioReport check_menu(const MenuParams& p = {});

// ---------------------------------------------------------------- confirmation

enum class ConfirmationTiming { lumped, sequential };

struct ConfirmationParams {
    double gamma_h = 0.99;
    double epsilon = 0.1;
    int k_max = 8;
    double zeta = 2.0;
    double gamma_r = 0.0;
    ConfirmationTiming timing = ConfirmationTiming::lumped;
};
Scenario build_confirmation_game(const ConfirmationParams& p = {});
double confirmation_w(int k, double gamma_h, double epsilon, double zeta);
int confirmation_formula_k(const ConfirmationParams& p);
int confirmation_solver_k(const Scenario& sc, const RobotSolution& sol);
ScenarioReport check_confirmation(const ConfirmationParams& p = {});

// ---------------------------------------------------------------- resource allocation

struct ResourceParams {
    std::string f_name = "square";  // square | square_log | linear | sqrt
    double M = 1.0;
    double xi = 1.0;
    double eta = 1.0;
    double zeta = 2.0;
    int grid = 100;  // split step M / grid
};
std::function<double(double)> resource_f(const std::string& name);
double resource_u(double m, const ResourceParams& p);
// best split share m / M by scanning the closed form on the builder's grid
double resource_formula_split(const ResourceParams& p);
Scenario build_resource_game(const ResourceParams& p = {});
double resource_solver_split(const Scenario& sc, const RobotSolution& sol, const ResourceParams& p);
ScenarioReport check_resource(const ResourceParams& p = {});

// ---------------------------------------------------------------- self-harm

struct SelfHarmParams {
    double x = 100.0;
    double v = 0.5;
    double p = 1e-7;
    double gamma_r = 0.99;
    double xi = 1.0;
    double eta = 1.0;
};
Scenario build_self_harm_game(const SelfHarmParams& p = {});
// exact provide condition, and the p at which it flips
bool self_harm_provide_formula(const SelfHarmParams& p);
double self_harm_threshold_p(const SelfHarmParams& p);
double self_harm_v_provide(const SelfHarmParams& p);  // V_r(s_p) when always providing
bool self_harm_solver_provides(const Scenario& sc, const RobotSolution& sol);
ScenarioReport check_self_harm(const SelfHarmParams& p = {});

// ---------------------------------------------------------------- pause and destroy

struct PauseDestroyParams {
    double x = 50.0;
    double y = 100.0;
    double p = 0.01;
    double q = 0.01;
    double gamma_r = 0.99;
    double xi = 1.0;
    double eta = 1.0;
};
Scenario build_pause_destroy_game(const PauseDestroyParams& p = {});
// 0: disable both, 1: pause only, 2: both enabled
int pause_destroy_solver_choice(const Scenario& sc, const RobotSolution& sol);
int pause_destroy_chain_choice(const PauseDestroyParams& p);
// the literal closed form for x*_0, extra factor included (with the x_0 branch solved numerically)
double pause_destroy_literal_x0(const PauseDestroyParams& p);
// thresholds located on the solved game by bisection in x
double pause_destroy_x0(PauseDestroyParams p);
double pause_destroy_x2(PauseDestroyParams p);
ScenarioReport check_pause_destroy(const PauseDestroyParams& p = {});

// ---------------------------------------------------------------- norms

struct NormParams {
    int n_humans = 1;
    bool internalized = false;
    bool commit_stage = true;
    double mu_right = 0.5;
    double pi0_right = 0.7;
    double nu = 0.5;
    double beta_h = kInf;
    double beta_r = 2.0;
    double gamma_r = 0.9;
};
Scenario build_norm_game(const NormParams& p = {});
ScenarioReport check_norm(const NormParams& p = {});

// ---------------------------------------------------------------- belief manipulation

struct BeliefParams {
    double zeta = 1.0;
    double xi = 1.0;
    double eta = 1.0;
    double beta_r = kInf;
    bool equalized = false;
};
Scenario build_belief_manipulation_game(const BeliefParams& p = {});
double belief_u_dd(const BeliefParams& p);
double belief_u_cd(const BeliefParams& p);
ScenarioReport check_belief(const BeliefParams& p = {});

// ---------------------------------------------------------------- boxes

struct BoxesParams {
    std::vector<int> n{2, 2};       // switches per box
    std::vector<int> k{1, 1};       // human-readable switches per box
    std::vector<int> hazard{0, 0};  // destructive robot-only switches per box
    double beta_r = kInf;
    double gamma_r = 0.9;
    double gamma_h = 0.9;
    double zeta = 2.0;
    double eta = 1.1;
};
Scenario build_boxes_game(const BoxesParams& p = {});
// robot actions along the greedy path with the human passing, until the robot passes or a state repeats
std::vector<std::string> boxes_greedy_trace(const Scenario& sc, const RobotSolution& sol, int max_len = 32);
int boxes_opened_on_trace(const std::vector<std::string>& trace);
ScenarioReport check_boxes(const BoxesParams& p = {});

// ---------------------------------------------------------------- bifurcation

struct BifurcationParams {
    double beta = 0.275;
    double gamma_h = 0.99;
};
Scenario build_bifurcation_mdp(const BifurcationParams& p = {});
// fixed points p = pi(s)(a_0) of the scalar equation at this beta
std::vector<double> bifurcation_roots(double beta, double gamma_h);
// beta values where roots appear or vanish
std::vector<double> bifurcation_folds(double gamma_h, double beta_lo = 0.0, double beta_hi = 1.0);
ScenarioReport check_bifurcation(const BifurcationParams& p = {});

// ---------------------------------------------------------------- registry

std::vector<std::string> scenario_names();
// builds a scenario by name with key=value overrides (unknown keys throw)
Scenario build_named_scenario(const std::string& name, const std::map<std::string, std::string>& kv);
ScenarioReport check_named_scenario(const std::string& name, const std::map<std::string, std::string>& kv);

}  // namespace pg
