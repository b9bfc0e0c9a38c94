#include <benchmark/benchmark.h>

#include "apq/linalg.hpp"
#include "apq/rng.hpp"

namespace {

apq::Matrix random_matrix(int n, std::uint64_t seed) {
  apq::CounterRng rng{seed, 1};
  return rng.gaussian_matrix(n, n, 0);
}

void bm_expm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  apq::Matrix m = random_matrix(n, 7);
  m /= apq::one_norm(m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apq::expm(m, 2.0));
  }
}
BENCHMARK(bm_expm)->Arg(16)->Arg(64);

} // namespace

BENCHMARK_MAIN();
