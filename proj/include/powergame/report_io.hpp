#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "powergame/game.hpp"
#include "powergame/gridworld.hpp"
#include "powergame/human_prior.hpp"
#include "powergame/robot_planner.hpp"
#include "powergame/scenarios.hpp"
#include "powergame/td_learner.hpp"

namespace pg {

using json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
// hash of the canonical gamespec text plus an options string
std::uint64_t content_hash(const Game& game, const PowerParams& params, std::string_view extra = {});
std::string hex64(std::uint64_t h);

// Doubles that are not finite become the strings "inf", "-inf", "nan".
json number_json(double x);

json prior_json(const Game& game, const HumanPrior& prior);
json solution_json(const Game& game, const RobotSolution& sol);
json scenario_report_json(const ScenarioReport& rep);
json horizon_bound_json(const HorizonBound& b);

std::string power_report_csv(const PowerReport& rep);
std::string scenario_report_csv(const ScenarioReport& rep);
// episode, td_error, return, success (success column left empty when not given)
std::string learn_metrics_csv(const Phase2Result& res, const std::vector<int>& success = {});
std::string phase1_metrics_csv(const std::vector<Phase1Result>& runs, const Game& game);
std::string trace_ndjson(const Game& game, const std::vector<EpisodeTrace>& traces);
// greedy rollout lines with key / unlock / aside event markers
std::string gridworld_rollout_ndjson(const Game& game, const GridRun& run);

// Binary cache: magic, content hash, then the RobotSolution tables. Reading returns nullopt on
// any mismatch (wrong hash, truncated file, other layout).
void write_solution_cache(const std::filesystem::path& path, std::uint64_t hash, const RobotSolution& sol);
std::optional<RobotSolution> read_solution_cache(const std::filesystem::path& path, std::uint64_t hash);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace pg
