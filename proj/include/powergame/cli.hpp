#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace pg {

// exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitParse = 2;
inline constexpr int kExitConvergence = 3;
inline constexpr int kExitMismatch = 4;

struct RunConfig {
    std::string command;  // solve | learn | scenario | power-report | check-bounds | bifurcation-scan | export
    std::string spec;     // gamespec path
    std::string scenario;
    std::map<std::string, std::string> scenario_args;  // --key value pairs after a scenario name
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::string format = "json";  // json | csv
    std::string cache_dir;
    // hyperparameters given on the command line or in the config file, by their table names
    std::map<std::string, double> hyper;
    std::vector<int> horizons{5, 10, 20, 40};
    double beta_lo = 0.0;
    double beta_hi = 1.0;
    int beta_steps = 101;
};

// flag parsing (CLI11); throws Error(usage) on bad input, returns false for --help
bool parse_cli(int argc, const char* const* argv, RunConfig& cfg, std::ostream& out);

int run_cli(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// names accepted in `hyper`
std::vector<std::string> hyperparameter_names();

}  // namespace pg
