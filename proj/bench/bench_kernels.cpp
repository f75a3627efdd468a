// OpenMP kernels against their serial references.
#include <benchmark/benchmark.h>

#include <vector>

#include "arcplan/connector.hpp"
#include "arcplan/planner.hpp"
#include "arcplan/stability.hpp"
#include "arcplan/world.hpp"

using namespace arcplan;

namespace {

const std::vector<double>& sweep_steps() {
    static const std::vector<double> hs = log_spaced(1e-2, 1.0, 40);
    return hs;
}

void BM_StabilitySweep(benchmark::State& state) {
    const VehicleParams p;
    for (auto _ : state) {
        benchmark::DoNotOptimize(stability_experiment(kAllSchemes, sweep_steps(), p));
    }
}

void BM_StabilitySweepSerial(benchmark::State& state) {
    const VehicleParams p;
    for (auto _ : state) {
        benchmark::DoNotOptimize(stability_experiment_serial(kAllSchemes, sweep_steps(), p));
    }
}

struct ShotSetup {
    OccupancyGrid grid{400, 400, 0.5, {}, std::vector<std::uint8_t>(400 * 400, 0)};
    VehicleParams params;
    PlannerConfig cfg = PlannerConfig::defaults_for(params);
    TreeNode root;
    std::vector<Point2> targets;

    explicit ShotSetup(int n) {
        root.state = {100, 100, 0, 0, 0};
        cfg.n_arc_points = n;
        targets = point_selector(root.state, cfg, params.delta_max);
    }
};

void BM_Shoot(benchmark::State& state) {
    const ShotSetup s(static_cast<int>(state.range(0)));
    const ShotContext ctx{s.grid, {180, 150}, s.cfg, s.params};
    for (auto _ : state) benchmark::DoNotOptimize(shoot(s.root, s.targets, ctx));
}

void BM_ShootSerial(benchmark::State& state) {
    const ShotSetup s(static_cast<int>(state.range(0)));
    const ShotContext ctx{s.grid, {180, 150}, s.cfg, s.params};
    for (auto _ : state) benchmark::DoNotOptimize(shoot_serial(s.root, s.targets, ctx));
}

void BM_Connect(benchmark::State& state) {
    const VehicleParams p;
    ConnectorConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(connect({0, 0, 0, 15}, {40, 10, 0.3, 15}, cfg, p));
}

void BM_ConnectSerial(benchmark::State& state) {
    const VehicleParams p;
    ConnectorConfig cfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(connect_serial({0, 0, 0, 15}, {40, 10, 0.3, 15}, cfg, p));
    }
}

}  // namespace

BENCHMARK(BM_StabilitySweep)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_StabilitySweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Shoot)->Arg(7)->Arg(64)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_ShootSerial)->Arg(7)->Arg(64)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_Connect)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ConnectSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
