#include <benchmark/benchmark.h>

#include <random>

#include "hcf/cf_engine.hpp"
#include "hcf/diagnostics.hpp"
#include "hcf/folner.hpp"
#include "hcf/schedules.hpp"
#include "hcf/shearbox.hpp"

using namespace hcf;

namespace {

Rational rnd(std::mt19937_64& rng, long bound = 40, long den = 9) {
  std::uniform_int_distribution<long> p(-bound, bound), q(1, den);
  Rational r(p(rng), q(rng));
  r.canonicalize();
  return r;
}

GroupElement element(std::mt19937_64& rng) { return {rnd(rng), rnd(rng), rnd(rng)}; }

void BM_GroupMul(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<GroupElement> xs;
  for (int i = 0; i < 256; ++i) xs.push_back(element(rng));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(xs[i % 256] * xs[(i + 1) % 256]);
    ++i;
  }
}
BENCHMARK(BM_GroupMul);

void BM_IntersectVolume(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto k = static_cast<std::size_t>(state.range(0));
  // Small translates of one box, so every subset overlaps.
  std::vector<BishearBox> boxes;
  for (std::size_t j = 0; j < k; ++j) {
    BishearBox b = box({3, 3, 5});
    b = left_translate({rnd(rng, 2, 4), rnd(rng, 2, 4), rnd(rng, 2, 4)}, b);
    boxes.push_back(right_translate(b, {rnd(rng, 2, 4), rnd(rng, 2, 4), 0}));
  }
  for (auto _ : state) benchmark::DoNotOptimize(intersect_volume(std::span<const BishearBox>(boxes)));
}
BENCHMARK(BM_IntersectVolume)->Arg(2)->Arg(3)->Arg(4);

void BM_Correlate(benchmark::State& state) {
  static const Schedule s = build_asymmetric(7, true, {});
  const int n = static_cast<int>(state.range(0));
  TestSet a = slab_set(s, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(correlate(gen_c(5), a.cylinder, a.cylinder, s));
}
BENCHMARK(BM_Correlate)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_Tiling(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tiling_check({1, 1, 1}, state.range(0)));
}
BENCHMARK(BM_Tiling)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
