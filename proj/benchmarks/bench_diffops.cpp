#include <benchmark/benchmark.h>

#include <random>

#include "destripe/diffops.hpp"

using namespace destripe;

namespace {

Volume noise(Dims d) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Volume v(d);
  for (double& x : v.values()) x = u(rng);
  return v;
}

void BM_ForwardDiff(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Volume v = noise({n, n, 1});
  const auto op = DiffOperator::axis(state.range(1) == 0 ? Axis::X : Axis::Y);
  Volume out(v.dims());
  for (auto _ : state) {
    op.apply(v.values(), out.values(), v.dims());
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_ForwardDiff)->ArgsProduct({{256, 1024}, {0, 1}});

void BM_ObliqueDiff(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Volume v = noise({n, n, 1});
  const auto op = DiffOperator::oblique(StripeDirection(1.4));
  Volume out(v.dims());
  for (auto _ : state) {
    op.apply(v.values(), out.values(), v.dims());
    op.apply_adjoint(out.values(), out.values(), v.dims());
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_ObliqueDiff)->Arg(256)->Arg(1024);

void BM_Gradient3D(benchmark::State& state) {
  const Volume v = noise({128, 128, static_cast<std::size_t>(state.range(0))});
  const auto tv = tv_operator(v.dims(), 0.5);
  for (auto _ : state) {
    auto g = tv.apply(v);
    benchmark::DoNotOptimize(tv.apply_adjoint(g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(v.size()));
}
BENCHMARK(BM_Gradient3D)->Arg(8)->Arg(32);

}  // namespace
