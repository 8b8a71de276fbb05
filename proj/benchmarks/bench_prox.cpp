#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "destripe/prox.hpp"

using namespace destripe;

namespace {

std::vector<double> samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void BM_SoftThreshold(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = samples(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(prox::prox_l1(std::span<const double>(x), 0.3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SoftThreshold)->Arg(1 << 16)->Arg(1 << 20);

void BM_GroupProjection(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = samples(n, 2);
  auto b = samples(n, 3);
  auto c = samples(n, 4);
  const auto a0 = a;
  const auto b0 = b;
  const auto c0 = c;
  std::vector<std::span<double>> ch{a, b, c};
  for (auto _ : state) {
    std::copy(a0.begin(), a0.end(), a.begin());
    std::copy(b0.begin(), b0.end(), b.begin());
    std::copy(c0.begin(), c0.end(), c.begin());
    prox::project_l2_ball_groups(ch, 0.5);
    benchmark::DoNotOptimize(a.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GroupProjection)->Arg(1 << 16)->Arg(1 << 20);

void BM_GroupHuber(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = samples(n, 5);
  auto b = samples(n, 6);
  std::vector<std::span<double>> ch{a, b};
  for (auto _ : state) {
    prox::prox_group_huber(ch, 0.1, 0.01);
    benchmark::DoNotOptimize(a.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GroupHuber)->Arg(1 << 16);

}  // namespace
