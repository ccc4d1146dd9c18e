#include <benchmark/benchmark.h>

#include <random>

#include "trasa/graph/session_graph.hpp"

namespace {

trasa::graph::Session random_session(std::size_t length, std::size_t alphabet) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<trasa::graph::ItemId> item(0, alphabet - 1);
  trasa::graph::Session s(length);
  for (auto& v : s) v = item(rng);
  return s;
}

void BM_BuildGraph(benchmark::State& state) {
  const auto session = random_session(static_cast<std::size_t>(state.range(0)), 1000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trasa::graph::build_graph(session));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildGraph)->RangeMultiplier(2)->Range(4, 64);

void BM_ShortestPaths(benchmark::State& state) {
  const auto session = random_session(static_cast<std::size_t>(state.range(0)), 1000);
  const auto g = trasa::graph::build_graph(session);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trasa::graph::shortest_paths(g));
  }
  state.counters["nodes"] = static_cast<double>(g.node_count());
}
BENCHMARK(BM_ShortestPaths)->RangeMultiplier(2)->Range(4, 64);

void BM_ShortestPathsWithRepeats(benchmark::State& state) {
  const auto session = random_session(static_cast<std::size_t>(state.range(0)), 6);
  const auto g = trasa::graph::build_graph(session);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trasa::graph::shortest_paths(g, {.cap = 16, .traverse_pre = true}));
  }
}
BENCHMARK(BM_ShortestPathsWithRepeats)->Arg(16)->Arg(64);

}  // namespace
