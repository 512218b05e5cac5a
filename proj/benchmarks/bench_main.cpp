#include <benchmark/benchmark.h>

#include "nsb/cocycle.hpp"
#include "nsb/construction.hpp"

using namespace nsb;

namespace {

const FamilyPtr& demo() {
  static const GroupModel Z(GroupKind::Z);
  static const FamilyPtr f = make_radial_demo_family(Z);
  return f;
}

void BM_EnginePrepare(benchmark::State& st) {
  const CocycleEngine eng(demo(), st.range(0), 1000);
  std::uint64_t seed = 0;
  for (auto _ : st) {
    auto p = eng.prepare(Configuration::sample(demo(), seed++));
    benchmark::DoNotOptimize(p.at(GroupElement::z(1)).value);
  }
}
BENCHMARK(BM_EnginePrepare)->Arg(20000)->Arg(250000)->Unit(benchmark::kMillisecond);

void BM_DirectCocycle(benchmark::State& st) {
  std::uint64_t seed = 0;
  for (auto _ : st) {
    const auto x = Configuration::sample(demo(), seed++);
    benchmark::DoNotOptimize(rn_cocycle(*demo(), GroupElement::z(1), x, st.range(0)).value);
  }
}
BENCHMARK(BM_DirectCocycle)->Arg(20000)->Unit(benchmark::kMillisecond);

void BM_PhiTrace(benchmark::State& st) {
  auto s = std::make_shared<SwapSchedule>(build_schedule(demo(), {}, 0.2, st.range(0)));
  const PhiMap phi(s, 0.5, 0.2, st.range(0), 1);
  std::uint64_t seed = 0;
  for (auto _ : st) benchmark::DoNotOptimize(phi.trace(Configuration::sample(demo(), seed++)).w_final);
}
BENCHMARK(BM_PhiTrace)->Arg(256)->Arg(4096);

void BM_BallEnumeration(benchmark::State& st) {
  const GroupModel G(static_cast<GroupKind>(st.range(0)));
  for (auto _ : st) {
    std::size_t n = 0;
    G.for_each_in_ball(st.range(1), [&](const GroupElement&) { ++n; });
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_BallEnumeration)
    ->Args({static_cast<int>(GroupKind::Z2), 100})
    ->Args({static_cast<int>(GroupKind::Lamplighter), 8})
    ->Args({static_cast<int>(GroupKind::F2), 8});

}  // namespace
BENCHMARK_MAIN();
