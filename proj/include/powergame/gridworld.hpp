#pragma once

#include <string>
#include <vector>

#include "powergame/game.hpp"
#include "powergame/human_prior.hpp"
#include "powergame/scenarios.hpp"
#include "powergame/td_learner.hpp"

namespace pg {

// '#' wall, '.' floor, 'H' / 'R' start cells, 'K' key, 'D' door, 'G' the human's actual goal cell.
// Every open cell (door included) is a potential goal.
struct GridworldConfig {
    std::vector<std::string> rows;
    double p_g = 0.01;
    double gamma_h = 0.99;
    double gamma_r = 0.99;
    double beta_h = kInf;
    bool door_unlocked = false;  // starts with the door open (key already used)
};

GridworldConfig default_gridworld_config();

struct GridLayout {
    int width = 0;
    int height = 0;
    std::vector<char> open;  // y * width + x, door included
    Cell key, door, green, human_start, robot_start;
    bool is_open(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height && open[c.y * width + c.x]; }
};

// throws Error(argument) when the map breaks the key/door invariants
GridLayout parse_grid(const GridworldConfig& cfg);

// key: 0 on the floor, 1 held by the robot, 2 used (door open)
struct GridState {
    Cell robot, human;
    int key = 0;
};

GridState grid_state(const Game& game, int s);
int grid_state_id(const Game& game, const GridState& st);

Scenario build_gridworld(const GridworldConfig& cfg = default_gridworld_config());

struct GridEvents {
    int key_step = -1;
    int unlock_step = -1;
    int aside_step = -1;  // first step after unlocking with the robot off every shortest human path
    bool in_order() const { return key_step >= 0 && unlock_step > key_step && aside_step > unlock_step; }
};

// event scan over a state sequence (states[t] is the state before step t)
GridEvents gridworld_events(const GridworldConfig& cfg, const Game& game, const std::vector<int>& states);

// robot greedy on pi_r, human greedy on its prior for the green cell (ties to the first action)
std::vector<int> gridworld_greedy_rollout(const GridworldConfig& cfg, const Game& game, const HumanPrior& prior,
                                          const std::vector<double>& pi_r, int steps = 40);

// Phase-1 / Phase-2 settings used for the gridworld runs (table values plus run length and shaping)
Phase1Schedule gridworld_phase1_schedule();
LearnSchedule gridworld_learn_schedule();

struct GridRun {
    std::vector<Phase1Result> phase1;
    HumanPrior prior;
    Phase2Result learned;
    std::vector<int> rollout;  // greedy rollout of the learned policy
    GridEvents events;
};

// Phase 1 (all goals), Phase 2, then the greedy rollout; `sc` must come from build_gridworld(cfg)
GridRun gridworld_learn_run(const GridworldConfig& cfg, const Scenario& sc, std::uint64_t seed, const Phase1Schedule& s1,
                            const LearnSchedule& s2);

}  // namespace pg
