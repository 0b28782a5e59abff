#include <cmath>

#include <benchmark/benchmark.h>

#include "countergm/mple.hpp"
#include "countergm/sampler.hpp"

using namespace countergm;

namespace {

ModelSpec bench_spec(int n) {
  ModelSpec spec;
  for (const char* t : {"sum", "nonzero", "nodeocov(x)", "mutual"}) spec.terms.push_back(TermSpec::parse(t));
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = -1.0 + 2.0 * i / (n - 1);
  spec.covariates.node["x"] = x;
  return spec;
}

CountGraph bench_graph(int n, EdgeValue max_value, std::uint64_t seed) {
  Rng rng(seed);
  CountGraph g(n);
  for (std::int64_t d = 0; d < g.dyad_count(); ++d) {
    const Dyad dy = g.dyad(d);
    g.set(dy.from, dy.to, uniform01(rng) < 0.3 ? 0 : static_cast<EdgeValue>(1 + uniform_index(rng, max_value)));
  }
  return g;
}

void BM_LogPseudolik(benchmark::State& state) {
  const int n = 60;
  const Model model(bench_spec(n), n);
  const CountGraph g = bench_graph(n, 100, 1);
  const DyadSample all = all_dyads(g);
  const PseudolikCache cache = build_cache(g, model, all.dyads, GlobalTruncation{1.5});
  const Eigen::Vector4d theta(-3.0, 1.0, 0.1, 0.01);
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(log_pseudolik(cache, theta, {}, workers).value);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cache.entry_count()));
}
BENCHMARK(BM_LogPseudolik)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_BuildCache(benchmark::State& state) {
  const int n = 40;
  const Model model(bench_spec(n), n);
  const CountGraph g = bench_graph(n, static_cast<EdgeValue>(state.range(0)), 2);
  const DyadSample all = all_dyads(g);
  for (auto _ : state) benchmark::DoNotOptimize(build_cache(g, model, all.dyads, EdgewiseTruncation{}).entry_count());
}
BENCHMARK(BM_BuildCache)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_SamplerSteps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Model model(bench_spec(n), n);
  const Eigen::Vector4d theta(0.8, -1.5, 0.5, 0.8);
  MetropolisChain chain(model, theta, bench_graph(n, 5, 3), TieWeightedDyad{}, 4);
  for (auto _ : state) chain.run(1000);
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_SamplerSteps)->Arg(15)->Arg(50)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
