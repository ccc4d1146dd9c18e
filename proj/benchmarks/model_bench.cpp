#include <benchmark/benchmark.h>

#include "trasa/model/trasa_model.hpp"

namespace {

trasa::model::Hyperparams bench_hyperparams(std::size_t dim) {
  trasa::model::Hyperparams hp;
  hp.vocab_size = 5000;
  hp.dim = dim;
  hp.num_heads = 4;
  return hp;
}

trasa::graph::Session bench_session(std::size_t length) {
  trasa::graph::Session s(length);
  for (std::size_t i = 0; i < length; ++i) s[i] = (i * 37) % 23;
  return s;
}

void BM_ScoreItems(benchmark::State& state) {
  trasa::model::TrasaModel<float> net(bench_hyperparams(64), 1);
  const auto session = bench_session(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.score_items(session));
  }
}
BENCHMARK(BM_ScoreItems)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_ForwardBackward(benchmark::State& state) {
  trasa::model::TrasaModel<float> net(bench_hyperparams(64), 1);
  const auto session = bench_session(static_cast<std::size_t>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        net.accumulate_gradients(session, 7, 1.0f, trasa::model::PassOptions{.training = true, .dropout_seed = ++seed}));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_ForwardBackwardByDim(benchmark::State& state) {
  trasa::model::TrasaModel<float> net(bench_hyperparams(static_cast<std::size_t>(state.range(0))), 1);
  const auto session = bench_session(10);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.accumulate_gradients(session, 7, 1.0f, trasa::model::PassOptions{}));
  }
}
BENCHMARK(BM_ForwardBackwardByDim)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMicrosecond);

}  // namespace
