// Serial reference versus OpenMP kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>
#include <random>

#include "sumrecom/kernels.hpp"
#include "sumrecom/simuser.hpp"

using namespace sumrecom;

namespace {

const SyntheticCluster& cluster_of_size(int documents) {
  static std::map<int, SyntheticCluster> cache;
  auto it = cache.find(documents);
  if (it == cache.end()) {
    SyntheticSpec spec;
    spec.documents = documents;
    spec.vocab_size = 20 * documents;
    it = cache.emplace(documents, make_synthetic_cluster(spec, 1, ConceptUnit::kBigram)).first;
  }
  return it->second;
}

void BM_CorefSerial(benchmark::State& state) {
  const auto& sc = cluster_of_size(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::coreference_table_serial(sc.cluster, default_similarity_model(), &sc.raw.embeddings));
  }
  state.counters["concepts"] = static_cast<double>(sc.cluster.concepts.size());
}

void BM_CorefParallel(benchmark::State& state) {
  const auto& sc = cluster_of_size(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::coreference_table_parallel(sc.cluster, default_similarity_model(), &sc.raw.embeddings));
  }
  state.counters["concepts"] = static_cast<double>(sc.cluster.concepts.size());
}

std::vector<double> random_scores(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_ArgminSerial(benchmark::State& state) {
  const auto v = random_scores(static_cast<std::size_t>(state.range(0)));
  auto score = [&](std::size_t i) { return std::abs(v[i] - 0.5); };
  for (auto _ : state) benchmark::DoNotOptimize(kernels::argmin_serial(v.size(), score));
}

void BM_ArgminParallel(benchmark::State& state) {
  const auto v = random_scores(static_cast<std::size_t>(state.range(0)));
  auto score = [&](std::size_t i) { return std::abs(v[i] - 0.5); };
  for (auto _ : state) benchmark::DoNotOptimize(kernels::argmin_parallel(v.size(), score));
}

}  // namespace

BENCHMARK(BM_CorefSerial)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorefParallel)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ArgminSerial)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_ArgminParallel)->Arg(1 << 12)->Arg(1 << 18);

BENCHMARK_MAIN();
