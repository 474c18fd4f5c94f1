#include <benchmark/benchmark.h>

#include "brick/bench.hpp"
#include "brick/brick_plus.hpp"
#include "brick/channel.hpp"
#include "brick/incentives.hpp"
#include "brick/world.hpp"

namespace {

using namespace brick;

void BM_Hash(benchmark::State& state) {
  Bytes data(static_cast<std::size_t>(state.range(0)), 0x5a);
  for (auto _ : state) benchmark::DoNotOptimize(hash(data));
  state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Hash)->Arg(64)->Arg(1024);

void BM_Sign(benchmark::State& state) {
  KeyPair k = keygen(derive_seed(1, "bench", 0));
  Bytes msg(48, 1);
  for (auto _ : state) benchmark::DoNotOptimize(sign(k, msg));
}
BENCHMARK(BM_Sign);

void BM_Verify(benchmark::State& state) {
  KeyPair k = keygen(derive_seed(1, "bench", 0));
  Bytes msg(48, 1);
  Signature sig = sign(k, msg);
  for (auto _ : state) benchmark::DoNotOptimize(verify(k.public_key(), msg, sig));
}
BENCHMARK(BM_Verify);

void BM_ReplayChain(benchmark::State& state) {
  std::mt19937_64 rng(7);
  StateHistory h;
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    h.push_back(ChannelState{static_cast<Seq>(i + 1), 6, 6, draw_salt(rng)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(replay_chain(h));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReplayChain)->Arg(16)->Arg(256);

void BM_BroadcastSim(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bench_broadcast(n, 100, 224));
}
BENCHMARK(BM_BroadcastSim)->Arg(7)->Arg(34)->Arg(151)->Unit(benchmark::kMillisecond);

void BM_BestResponse(benchmark::State& state) {
  GameParams p{12, state.range(0), 0, 1};
  for (auto _ : state) benchmark::DoNotOptimize(best_response(p));
}
BENCHMARK(BM_BestResponse)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_Scenario(benchmark::State& state) {
  auto cfg = scenario_preset(state.range(0) ? "byzantine-f" : "honest-flow", 1);
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(*cfg));
}
BENCHMARK(BM_Scenario)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
