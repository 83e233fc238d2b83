#include "dpglmb/metrics.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

std::vector<Eigen::VectorXd> points(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1000.0, 1000.0);
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < n; ++i) out.push_back(Eigen::Vector4d(u(rng), u(rng), 0.0, 0.0));
    return out;
}

void BM_Ospa(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const int n = static_cast<int>(state.range(0));
    const auto x = points(n, rng);
    const auto y = points(n + 2, rng);
    for (auto _ : state) benchmark::DoNotOptimize(dpglmb::ospa(x, y, dpglmb::MetricConfig{}));
}
BENCHMARK(BM_Ospa)->Arg(5)->Arg(12)->Arg(50);

void BM_Ospa2(benchmark::State& state) {
    std::mt19937_64 rng(4);
    dpglmb::LabeledTrackSet a;
    dpglmb::LabeledTrackSet b;
    for (int k = 0; k < 12; ++k) {
        for (int t = 1; t <= 100; ++t) {
            a[{1, k}][t] = points(1, rng).front();
            b[{2, k}][t] = points(1, rng).front();
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(dpglmb::ospa2(a, b, 50, dpglmb::MetricConfig{}));
}
BENCHMARK(BM_Ospa2);

}  // namespace
