#include <benchmark/benchmark.h>

#include <random>

#include "hypotopo/ghg.hpp"
#include "hypotopo/homology.hpp"
#include "hypotopo/metric_space.hpp"
#include "hypotopo/pipeline.hpp"
#include "hypotopo/synth.hpp"

using namespace hypotopo;

namespace {

DistanceMatrix random_distances(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, u(rng));
  }
  return d;
}

ProblemInstance corpus_instance(std::size_t paths) {
  SynthConfig sc;
  sc.paths = paths;
  sc.distractors = paths / 2;
  sc.backbone_length = 8;
  sc.noise = 0.3;
  return generate_instance(sc, 0);
}

}  // namespace

static void BM_KnnGraph(benchmark::State& state) {
  const auto d = random_distances(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(build_knn_graph(d, 15, 95.0));
}
BENCHMARK(BM_KnnGraph)->Arg(50)->Arg(100)->Arg(200);

static void BM_Persistence(benchmark::State& state) {
  const auto g = build_knn_graph(random_distances(static_cast<std::size_t>(state.range(0)), 2), 15, 95.0);
  for (auto _ : state) benchmark::DoNotOptimize(compute_persistence(build_filtration(g)));
}
BENCHMARK(BM_Persistence)->Arg(50)->Arg(100)->Arg(200);

static void BM_BuildGraph(benchmark::State& state) {
  const auto inst = corpus_instance(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(inst));
}
BENCHMARK(BM_BuildGraph)->Arg(5)->Arg(20);

static void BM_Instance(benchmark::State& state) {
  const auto inst = corpus_instance(static_cast<std::size_t>(state.range(0)));
  RunConfig config;
  auto ctx = make_context(config);
  for (auto _ : state) benchmark::DoNotOptimize(analyze_instance(inst, config, ctx));
}
BENCHMARK(BM_Instance)->Arg(5)->Arg(20);

BENCHMARK_MAIN();
