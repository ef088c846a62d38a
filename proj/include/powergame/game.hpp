#pragma once

#include <cstddef>
#include <map>
#include <tuple>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "powergame/common.hpp"

namespace pg {

// terminal: a goal entry stops further collection only when the goal state is terminal.
// first_entry: every goal entry is absorbing for that goal (gridworld style).
enum class Absorption { terminal, first_entry };

struct Transition {
    int next = 0;
    double prob = 0.0;
};

struct BehaviorParams {
    double nu = 0.0;
    double beta = kInf;
    std::vector<double> pi0;              // empty = uniform
    std::vector<std::vector<double>> mu;  // indexed by other human; empty entry = uniform
};

struct Goal {
    std::string name;
    std::vector<int> states;
};

struct Commitment {
    int base_state = -1;
    std::vector<std::string> actions;
};

struct Cell {
    int x = 0;
    int y = 0;
};

struct Geometry {
    std::vector<Cell> human_pos;             // s * H + h
    std::vector<std::vector<Cell>> goal_pos; // [h][g]
};

struct Game {
    std::string name = "game";
    std::vector<std::string> state_names;
    std::vector<char> terminal;
    std::vector<int> initial;
    std::vector<std::string> human_names;
    std::vector<double> gamma_h;
    double gamma_r = 0.99;
    int goal_resample_period = 1;
    Absorption absorption = Absorption::terminal;

    std::vector<std::vector<std::string>> robot_actions;               // [s]
    std::vector<std::vector<std::vector<std::string>>> human_actions;  // [s][h]

    // CSR kernel. Joint rows of state s are joint_offset[s] .. joint_offset[s+1];
    // within a state the joint index is robot-major, then humans in order.
    std::vector<std::size_t> joint_offset;
    std::vector<std::size_t> row_ptr;
    std::vector<Transition> trans;

    std::vector<std::vector<Goal>> goals;  // [h]
    std::vector<int> goal_offset;          // H + 1, flat goal index = goal_offset[h] + g
    std::vector<BehaviorParams> behavior;  // s * total_goals() + flat goal
    std::vector<std::optional<Commitment>> commitment;
    std::optional<Geometry> geometry;
    std::vector<double> x_override;  // empty, or H * S with NaN meaning "derive from goals"

    // derived by finalize()
    std::vector<char> member_bits;  // flat goal * S + s

    int num_states() const { return static_cast<int>(state_names.size()); }
    int num_humans() const { return static_cast<int>(human_names.size()); }
    int num_goals(int h) const { return goal_offset[h + 1] - goal_offset[h]; }
    int total_goals() const { return goal_offset.empty() ? 0 : goal_offset.back(); }
    int num_robot(int s) const { return static_cast<int>(robot_actions[s].size()); }
    int num_human(int s, int h) const { return static_cast<int>(human_actions[s][h].size()); }
    std::size_t num_joint(int s) const { return joint_offset[s + 1] - joint_offset[s]; }
    std::size_t human_profiles(int s) const { return num_joint(s) / robot_actions[s].size(); }

    std::span<const Transition> row(int s, std::size_t joint) const {
        std::size_t r = joint_offset[s] + joint;
        return {trans.data() + row_ptr[r], row_ptr[r + 1] - row_ptr[r]};
    }
    // human profile index from per-human action ids (h0 most significant)
    std::size_t profile_index(int s, const int* ah) const;
    void decode_profile(int s, std::size_t profile, int* ah) const;

    bool member(int h, int g, int s) const {
        return member_bits[static_cast<std::size_t>(goal_offset[h] + g) * state_names.size() + s] != 0;
    }
    const BehaviorParams& behavior_at(int s, int h, int g) const {
        return behavior[static_cast<std::size_t>(s) * total_goals() + goal_offset[h] + g];
    }
    BehaviorParams& behavior_at(int s, int h, int g) {
        return behavior[static_cast<std::size_t>(s) * total_goals() + goal_offset[h] + g];
    }
    bool has_x_override(int h, int s) const;
    double x_override_at(int h, int s) const { return x_override[static_cast<std::size_t>(h) * state_names.size() + s]; }

    int state_index(const std::string& nm) const;  // -1 when unknown
    int human_index(const std::string& nm) const;
    int goal_index(int h, const std::string& nm) const;

    // Rebuilds goal offsets and member bitmaps; sizes behavior/commitment tables.
    void finalize();
};

// Convenience construction; kernel rows are given per (s, a_r, a_H).
class GameBuilder {
public:
    explicit GameBuilder(std::string name = "game");

    int add_human(const std::string& name, double gamma_h);
    int add_state(const std::string& name, bool terminal = false, bool initial = false);
    void set_robot_actions(int s, std::vector<std::string> names);
    void set_human_actions(int s, int h, std::vector<std::string> names);
    // ah lists one action id per human
    void set_transition(int s, int ar, const std::vector<int>& ah, std::vector<Transition> row);
    int add_goal(int h, const std::string& name, std::vector<int> states);
    void set_commitment(int s, int base_state, std::vector<std::string> actions);
    BehaviorParams& behavior(int s, int h, int g);
    void set_default_behavior(int h, const BehaviorParams& p);

    Game& game() { return g_; }
    // Terminals default to a single "pass" per agent with a self-loop.
    Game build();

private:
    Game g_;
    std::vector<std::vector<std::tuple<int, std::vector<int>, std::vector<Transition>>>> raw_;  // [s]
    std::map<std::tuple<int, int, int>, BehaviorParams> beh_;
    std::vector<std::optional<BehaviorParams>> default_beh_;
};

struct ValidationIssue {
    std::string kind;
    std::string message;
    int state = -1;
    int human = -1;
    int goal = -1;
    std::size_t joint = 0;
    std::vector<int> witness;  // state path for reachability violations
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string summary() const;
};

ValidationReport validate_game(const Game& game);

// Topological order with every positive-probability transition moving strictly forward;
// terminal self-loops are ignored. Ties resolved by smallest state id.
std::optional<std::vector<int>> is_acyclic(const Game& game);

int reachable_goal_indicator(const Game& game, int h, int g, int s);

// Copy of the game with A_r(s) cut down to `keep` (robot action ids); rows follow.
Game restrict_robot_actions(const Game& game, int s, const std::vector<int>& keep);

// States reachable (>= 0 steps) from `sources` over the kernel support.
std::vector<char> reachable_states(const Game& game, const std::vector<int>& sources);

// Continuation factor c(s') for goal g of human h: 0 when entering s' ends collection.
inline bool goal_absorbs(const Game& game, int h, int g, int s) {
    if (!game.member(h, g, s)) return false;
    return game.absorption == Absorption::first_entry || game.terminal[s];
}

}  // namespace pg
