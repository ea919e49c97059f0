#include <benchmark/benchmark.h>

#include "mtsim/benchmarks.hpp"
#include "mtsim/combine.hpp"
#include "mtsim/instances.hpp"
#include "mtsim/kserver.hpp"

namespace {

using namespace mtsim;

struct Workload {
  MtsInstance inst;
  std::vector<PredictorTrace> traces;
};

Workload make_workload(std::size_t n, std::size_t T, std::size_t ell) {
  Rng rng(42);
  Workload w;
  w.inst = instances::gen_random_mts({.n = n, .T = T}, rng);
  w.traces = instances::gen_predictors(w.inst, instances::PredictorKind::kNoisyOpt, ell, {}, rng);
  return w;
}

void BM_Dyn(benchmark::State& state) {
  const auto w = make_workload(16, static_cast<std::size_t>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(benchmarks::dyn(w.inst, w.traces).value);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dyn)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_DynLimited(benchmark::State& state) {
  const auto w = make_workload(16, 2048, 8);
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(benchmarks::dyn_limited(w.inst, w.traces, m).value);
}
BENCHMARK(BM_DynLimited)->Arg(4)->Arg(32)->Arg(256);

void BM_OfflineOpt(benchmark::State& state) {
  const auto w = make_workload(static_cast<std::size_t>(state.range(0)), 1024, 2);
  for (auto _ : state) benchmark::DoNotOptimize(benchmarks::offline_opt(w.inst).value);
}
BENCHMARK(BM_OfflineOpt)->Arg(8)->Arg(32)->Arg(64);

void BM_SubroutineFeed(benchmark::State& state) {
  const auto alg = state.range(0) == 0 ? unfair::Algorithm::kOddExponent : unfair::Algorithm::kShare;
  const auto ell = static_cast<std::size_t>(state.range(1));
  Rng rng(7);
  std::vector<CostVector> costs(1024, CostVector(ell));
  for (auto& c : costs) {
    for (auto& x : c) x = uniform01(rng);
  }
  for (auto _ : state) {
    auto sub = combine::make_subroutine(alg, ell, 10.0);
    for (const auto& c : costs) sub->feed(c);
    benchmark::DoNotOptimize(sub->distribution().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(costs.size()));
}
BENCHMARK(BM_SubroutineFeed)->ArgsProduct({{0, 1}, {2, 8, 32}});

void BM_CombineRun(benchmark::State& state) {
  const auto w = make_workload(16, 1024, 8);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    Rng rng(seed++);
    benchmark::DoNotOptimize(combine::combine_run(w.inst, w.traces, {}, rng).trajectory.total);
  }
}
BENCHMARK(BM_CombineRun);

void BM_RestrictedOpt(benchmark::State& state) {
  const std::size_t k = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> xs(k + 1);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
  kserver::KServerInstance kinst{MetricSpace::line(xs), {}, {}};
  for (std::size_t s = 0; s < k; ++s) kinst.initial.push_back(s);
  std::vector<std::vector<kserver::ServerId>> allowed;
  for (int t = 0; t < 256; ++t) {
    kinst.requests.push_back(uniform_index(rng, k + 1));
    allowed.push_back({uniform_index(rng, k), uniform_index(rng, k)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(kserver::restricted_opt(kinst, allowed));
}
BENCHMARK(BM_RestrictedOpt)->Arg(2)->Arg(3)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
