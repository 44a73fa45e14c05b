#include <benchmark/benchmark.h>

#include <random>

#include "viscofem/logconf.hpp"

using namespace vfem;

namespace {

std::vector<std::pair<SymTensor2, Tensor2>> make_states(int n) {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> us(-2.0, 2.0), ug(-1.0, 1.0);
  std::vector<std::pair<SymTensor2, Tensor2>> out(n);
  for (auto& [s, g] : out) {
    s = {us(rng), us(rng), us(rng)};
    g = {ug(rng), ug(rng), ug(rng), ug(rng)};
  }
  return out;
}

void BM_EigSym(benchmark::State& state) {
  auto data = make_states(1024);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eig_sym(data[i % data.size()].first));
    ++i;
  }
}
BENCHMARK(BM_EigSym);

void BM_Reaction(benchmark::State& state) {
  auto data = make_states(1024);
  ModelClosure m;
  m.kind = Model::FENECR;
  m.a_max_sq = 100.0;
  size_t i = 0;
  for (auto _ : state) {
    const auto& [s, g] = data[i % data.size()];
    benchmark::DoNotOptimize(reaction(s, g, m, 0.5));
    ++i;
  }
}
BENCHMARK(BM_Reaction);

void BM_ReactionDerivs(benchmark::State& state) {
  auto data = make_states(1024);
  ModelClosure m;  // Oldroyd-B consistent
  size_t i = 0;
  for (auto _ : state) {
    const auto& [s, g] = data[i % data.size()];
    benchmark::DoNotOptimize(reaction_derivs(s, g, m, 0.5));
    ++i;
  }
}
BENCHMARK(BM_ReactionDerivs);

}  // namespace

BENCHMARK_MAIN();
