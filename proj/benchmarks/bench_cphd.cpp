#include "dpglmb/rcphd.hpp"
#include "dpglmb/rng.hpp"
#include "dpglmb/sim.hpp"

#include <benchmark/benchmark.h>

namespace {

/// Robust CPHD state after `steps` cycles on the linear scenario without object births.
dpglmb::CphdState warmed_state(const dpglmb::Scenario& sc, int steps) {
    dpglmb::CphdState s = dpglmb::CphdState::initial(dpglmb::ClutterModel{});
    for (int t = 1; t <= steps; ++t) {
        const auto frame = dpglmb::simulate_frame(sc, t, 11);
        s = dpglmb::cphd_reduce(dpglmb::cphd_update(dpglmb::cphd_predict(s, {}, sc.motion, 1.2), frame.measurements, sc.sensor));
    }
    return s;
}

void BM_CphdCycle(benchmark::State& state) {
    const auto sc = dpglmb::generate_linear_scenario(5);
    const auto s = warmed_state(sc, 10);
    const auto frame = dpglmb::simulate_frame(sc, 11, 11);
    for (auto _ : state) {
        const auto predicted = dpglmb::cphd_predict(s, {}, sc.motion, 1.2);
        benchmark::DoNotOptimize(dpglmb::cphd_reduce(dpglmb::cphd_update(predicted, frame.measurements, sc.sensor)));
    }
}
BENCHMARK(BM_CphdCycle)->Unit(benchmark::kMicrosecond);

}  // namespace
