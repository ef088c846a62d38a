// Serial reference vs OpenMP kernels: per-(h, g) prior solves, per-(h, g) V^e evaluation
// inside the robot solve, and per-(h, g) phase-1 learners.

#include <benchmark/benchmark.h>

#include "powergame/gridworld.hpp"
#include "powergame/human_prior.hpp"
#include "powergame/robot_planner.hpp"
#include "powergame/scenarios.hpp"

using namespace pg;

namespace {

ExecPolicy exec_of(const benchmark::State& st) { return st.range(0) ? ExecPolicy::parallel : ExecPolicy::serial; }

const Scenario& boxes() {
    static Scenario sc = [] {
        BoxesParams p;
        p.n = {3, 3};
        p.k = {2, 2};
        return build_boxes_game(p);
    }();
    return sc;
}

const Scenario& grid() {
    static Scenario sc = build_gridworld();
    return sc;
}

void BM_prior_fixed_point(benchmark::State& st) {
    const auto& sc = boxes();
    PriorOptions o = sc.prior_opt;
    o.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(solve_prior_fixed_point(sc.game, o).residual);
}

void BM_robot_solve(benchmark::State& st) {
    const auto& sc = boxes();
    auto prior = solve_prior_fixed_point(sc.game, sc.prior_opt);
    RobotOptions o = sc.robot_opt;
    o.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(solve_robot(sc.game, prior, sc.params, o).residual);
}

void BM_gridworld_prior(benchmark::State& st) {
    const auto& sc = grid();
    PriorOptions o = sc.prior_opt;
    o.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(solve_prior_fixed_point(sc.game, o).residual);
}

void BM_phase1_all(benchmark::State& st) {
    const auto& sc = grid();
    Phase1Schedule s = gridworld_phase1_schedule();
    s.episodes = 200;
    for (auto _ : st) benchmark::DoNotOptimize(phase1_learn_all(sc.game, s, 1, exec_of(st)).v_m.data());
}

}  // namespace

BENCHMARK(BM_prior_fixed_point)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_robot_solve)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gridworld_prior)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_phase1_all)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
