#include <benchmark/benchmark.h>

#include <random>

#include "hmmep/chain_entropy.hpp"
#include "hmmep/chain_inference.hpp"
#include "hmmep/tree_entropy.hpp"
#include "hmmep/tree_inference.hpp"

namespace {

using namespace hmmep;

HmmModel bench_model(std::size_t J) {
  std::mt19937_64 rng(J);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  auto row = [&](std::size_t k) {
    std::vector<double> r(k);
    double s = 0.0;
    for (double& x : r) s += (x = u(rng));
    for (double& x : r) x /= s;
    return r;
  };
  HmmModel m;
  m.num_states = J;
  m.initial = row(J);
  m.transition = Matrix(J, J);
  for (std::size_t i = 0; i < J; ++i) {
    const auto r = row(J);
    std::copy(r.begin(), r.end(), m.transition.row(i).begin());
  }
  for (std::size_t j = 0; j < J; ++j) m.emissions.push_back({{CategoricalDist{row(5)}}});
  return m;
}

TreeTopology binary_tree(std::size_t n) {
  std::vector<VertexId> parents(n, kNoParent);
  for (VertexId u = 1; u < n; ++u) parents[u] = (u - 1) / 2;
  return TreeTopology::from_parents(std::move(parents));
}

void BM_ChainSmooth(benchmark::State& state) {
  const HmmModel m = bench_model(static_cast<std::size_t>(state.range(1)));
  const auto x = simulate_chain(m, static_cast<std::size_t>(state.range(0)), 1).observations;
  for (auto _ : state) benchmark::DoNotOptimize(smooth_chain(m, x).log_likelihood);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChainSmooth)->ArgsProduct({{10000, 20000, 40000}, {4}})->Complexity(benchmark::oN);

void BM_ChainEntropy(benchmark::State& state) {
  const HmmModel m = bench_model(static_cast<std::size_t>(state.range(1)));
  const auto x = simulate_chain(m, static_cast<std::size_t>(state.range(0)), 1).observations;
  for (auto _ : state) {
    const auto post = smooth_chain(m, x);
    benchmark::DoNotOptimize(entropy_past_hernando(m, x, post).global_entropy);
    benchmark::DoNotOptimize(entropy_future(m, x, post).global_entropy);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChainEntropy)->ArgsProduct({{10000, 20000, 40000}, {4}})->Complexity(benchmark::oN);

void BM_ChainViterbi(benchmark::State& state) {
  const HmmModel m = bench_model(4);
  const auto x = simulate_chain(m, static_cast<std::size_t>(state.range(0)), 1).observations;
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_chain(m, x).log_joint);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChainViterbi)->Arg(10000)->Arg(20000)->Arg(40000)->Complexity(benchmark::oN);

void BM_TreeEntropy(benchmark::State& state) {
  const HmmModel m = bench_model(static_cast<std::size_t>(state.range(1)));
  const auto t = simulate_tree(m, binary_tree(static_cast<std::size_t>(state.range(0))), 1).observations;
  for (auto _ : state) {
    const auto post = smooth_tree(m, t);
    benchmark::DoNotOptimize(tree_entropy_profile(m, t, post).global_entropy);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TreeEntropy)->ArgsProduct({{10000, 20000, 40000}, {4}})->Complexity(benchmark::oN);

void BM_TreeViterbiProfiles(benchmark::State& state) {
  const HmmModel m = bench_model(4);
  const auto t = simulate_tree(m, binary_tree(static_cast<std::size_t>(state.range(0))), 1).observations;
  for (auto _ : state) benchmark::DoNotOptimize(viterbi_profiles(m, t)(0, 0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TreeViterbiProfiles)->Arg(10000)->Arg(20000)->Arg(40000)->Complexity(benchmark::oN);

}  // namespace
BENCHMARK_MAIN();
