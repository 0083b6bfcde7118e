// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "mfa/gdms.hpp"
#include "mfa/kernels.hpp"
#include "mfa/potentials.hpp"

namespace {

using namespace mfa;

const System& cf_system() {
  static const System s = [] {
    BuiltinParams p;
    p.truncation = 10;
    return builtin_system("cf_full", p);
  }();
  return s;
}

void BM_PartitionSerial(benchmark::State& state) {
  const System& s = cf_system();
  const auto fam = PotentialFamily::geometric(s, 1.0);
  const auto w = make_weights(s, fam, 0.0, 0.9);
  const auto depth = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::partition_table_serial(s, fam, w, depth, kDefaultWordBudget));
}

void BM_PartitionParallel(benchmark::State& state) {
  const System& s = cf_system();
  const auto fam = PotentialFamily::geometric(s, 1.0);
  const auto w = make_weights(s, fam, 0.0, 0.9);
  const auto depth = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::partition_table_parallel(s, fam, w, depth, kDefaultWordBudget));
}

void BM_CollocationSerial(benchmark::State& state) {
  const System& s = cf_system();
  const auto fam = PotentialFamily::geometric(s, 1.0);
  const auto w = make_weights(s, fam, 0.0, 0.9);
  const auto grid = kernels::make_collocation_grid(s, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::collocation_matrix_serial(s, fam, w, grid));
}

void BM_CollocationParallel(benchmark::State& state) {
  const System& s = cf_system();
  const auto fam = PotentialFamily::geometric(s, 1.0);
  const auto w = make_weights(s, fam, 0.0, 0.9);
  const auto grid = kernels::make_collocation_grid(s, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::collocation_matrix_parallel(s, fam, w, grid));
}

}  // namespace

BENCHMARK(BM_PartitionSerial)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PartitionParallel)->Arg(5)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CollocationSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CollocationParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
