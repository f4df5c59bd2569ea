#include <benchmark/benchmark.h>

#include <random>

#include "dpp/convex.hpp"
#include "dpp/linear_program.hpp"
#include "dpp/stochastic.hpp"

using namespace dpp;

namespace {

void BM_PerSlotDecision(benchmark::State& state) {
  const auto count = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<OptionVector> options(count, OptionVector(4));
  for (auto& y : options) {
    for (auto& x : y) x = u(gen);
  }
  QueueState q(3, 0);
  q.ineq = {1.0, 2.0, 3.0};
  for (auto _ : state) benchmark::DoNotOptimize(per_slot_decision(options, q, 10.0));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(count));
}
BENCHMARK(BM_PerSlotDecision)->Arg(4)->Arg(64)->Arg(1024);

void BM_RunLp(benchmark::State& state) {
  const LinearProgram lp{{1.0, 1.0}, {{-1.0, -1.0}}, {-1.0}, {0.0, 0.0}, {1.0, 1.0}};
  const auto slots = static_cast<Slot>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_lp(lp, 100.0, slots).length());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunLp)->Arg(1000)->Arg(40000);

void BM_InnerMinimize(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto f = ConvexFunction::diagonal_quadratic(std::vector<double>(n, 1.0), std::vector<double>(n, -0.5), 0.0);
  const auto set = FeasibleSet::box(std::vector<double>(n, -1.0), std::vector<double>(n, 1.0));
  for (auto _ : state) benchmark::DoNotOptimize(inner_minimize(f, set, {}).value);
}
BENCHMARK(BM_InnerMinimize)->Arg(1)->Arg(4)->Arg(16);

void BM_RunStochastic(benchmark::State& state) {
  StochasticProblem p;
  p.c = {0.0};
  p.events = RandomEventModel({"a", "b"}, {0.3, 0.7});
  p.options = {{{0.0, 1.0}, {1.0, -1.0}, {2.0, -2.0}}, {{0.0, 1.0}, {1.5, -0.5}}};
  p.validate();
  const auto slots = static_cast<Slot>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_stochastic(p, 20.0, slots, 1).length());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunStochastic)->Arg(1600);

}  // namespace

BENCHMARK_MAIN();
