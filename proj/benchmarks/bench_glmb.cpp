#include "dpglmb/config.hpp"
#include "dpglmb/pipeline.hpp"
#include "dpglmb/sim.hpp"

#include <benchmark/benchmark.h>

namespace {

/// One bootstrapped filter step at time 31 of the default linear scenario,
/// starting from the state reached after 30 steps.
void BM_DpGlmbStep(benchmark::State& state) {
    auto cfg = dpglmb::parse_config("");
    cfg.pipeline.glmb.max_hypotheses = static_cast<std::size_t>(state.range(0));
    const auto sc = dpglmb::make_scenario(cfg.scenario);
    const auto models = dpglmb::make_models(cfg.scenario);
    auto s = dpglmb::initial_pipeline_state(cfg.pipeline);
    for (int t = 1; t <= 30; ++t) {
        s = dpglmb::dp_glmb_step(s, dpglmb::simulate_frame(sc, t, 3).measurements, models, cfg.pipeline,
                                 static_cast<std::uint64_t>(t))
                .first;
    }
    const auto z = dpglmb::simulate_frame(sc, 31, 3).measurements;
    for (auto _ : state) benchmark::DoNotOptimize(dpglmb::dp_glmb_step(s, z, models, cfg.pipeline, 31));
}
BENCHMARK(BM_DpGlmbStep)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
