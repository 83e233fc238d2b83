#include "dpglmb/gibbs.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

/// Dense cost with `rows` tracks and `meas` measurements, log-weights in [-6, 0].
dpglmb::AssociationCost dense_cost(int rows, int meas, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-6.0, 0.0);
    Eigen::MatrixXd lw(rows, meas + 2);
    for (int i = 0; i < lw.rows(); ++i) {
        for (int j = 0; j < lw.cols(); ++j) lw(i, j) = u(rng);
    }
    return dpglmb::AssociationCost::from_dense(lw);
}

void BM_GibbsTruncate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto cost = dense_cost(n, n + 50, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(dpglmb::gibbs_truncate(cost, 1000, 7));
    }
    state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_GibbsTruncate)->Arg(4)->Arg(12)->Arg(24);

}  // namespace
