#include <benchmark/benchmark.h>

#include <random>

#include "fraclat/jumpsim.hpp"
#include "fraclat/kernel.hpp"
#include "fraclat/schrodinger.hpp"
#include "fraclat/semigroup.hpp"
#include "fraclat/squarefn.hpp"

using namespace fraclat;

namespace {

LatticeFunction random_function(std::int64_t half, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(static_cast<std::size_t>(2 * half + 1));
  for (auto& x : v) x = g(rng);
  return LatticeFunction(Window(-half, half), std::move(v));
}

void BM_KernelConstruct(benchmark::State& state) {
  for (auto _ : state) {
    FractionalKernel k(0.37, state.range(0));
    benchmark::DoNotOptimize(k.l1_norm());
  }
}
BENCHMARK(BM_KernelConstruct)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMicrosecond);

void BM_HeatKernelTable(benchmark::State& state) {
  const SemigroupEvaluator ev(0.5);
  const double t = static_cast<double>(state.range(1)) / 100.0;
  for (auto _ : state) {
    auto tab = ev.table(t, state.range(0));
    benchmark::DoNotOptimize(tab.p.data());
  }
}
BENCHMARK(BM_HeatKernelTable)->Args({256, 1})->Args({256, 10000})->Args({4096, 100})->Unit(benchmark::kMicrosecond);

void BM_SquareG(benchmark::State& state) {
  const FractionalKernel k(0.5);
  const SemigroupEvaluator ev(0.5);
  const SquareFunctionEngine engine(k, ev);
  const auto f = random_function(10, 1);
  const Window xs(-state.range(0), state.range(0));
  engine.evaluate(f, SquareKind::G, xs);  // warm the table cache
  for (auto _ : state) {
    auto r = engine.evaluate(f, SquareKind::G, xs);
    benchmark::DoNotOptimize(r.squared.data());
  }
}
BENCHMARK(BM_SquareG)->Arg(0)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_SamplePath(benchmark::State& state) {
  const TransitionLaw law{FractionalKernel(0.5)};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto p = sample_path(law, 0, static_cast<double>(state.range(0)), ++seed);
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(BM_SamplePath)->Arg(1)->Arg(100);

void BM_SchrodingerSemigroup(benchmark::State& state) {
  const FractionalKernel k(0.5);
  const std::int64_t h = state.range(0);
  const LatticeFunction U(Window(-h, h), std::vector<double>(static_cast<std::size_t>(2 * h + 1), 0.5));
  const SchrodingerEvaluator sch(k, U, Window(-h, h));
  double t = 0.0;
  for (auto _ : state) {
    t += 1e-3;  // defeat the per-t memo
    benchmark::DoNotOptimize(sch.semigroup_matrix(t).data());
  }
}
BENCHMARK(BM_SchrodingerSemigroup)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
