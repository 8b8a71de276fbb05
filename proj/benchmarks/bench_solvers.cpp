#include <benchmark/benchmark.h>

#include "destripe/fourier_filter.hpp"
#include "destripe/gsr.hpp"
#include "destripe/synth.hpp"
#include "destripe/vsnr.hpp"

using namespace destripe;

namespace {

Volume striped(Dims d) {
  PhantomSpec ps;
  ps.dims = d;
  return corrupt(make_phantom(ps, 1), make_stripes(StripeSpec{}, d, 2)).image;
}

// Cost per primal-dual iteration: a fixed short run divided out by the item count.
void BM_GsrIterations(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Volume u0 = striped({n, n, 1});
  SolverSettings s;
  s.max_iters = 50;
  for (auto _ : state) benchmark::DoNotOptimize(solve_gsr(u0, GsrParams{}, s));
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_GsrIterations)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_GsrOblique(benchmark::State& state) {
  const Volume u0 = striped({256, 256, 1});
  GsrParams p;
  p.directions = {StripeDirection(1.67)};
  SolverSettings s;
  s.max_iters = 50;
  for (auto _ : state) benchmark::DoNotOptimize(solve_gsr_oblique(u0, p, s));
  state.SetItemsProcessed(state.iterations() * 50);
}
BENCHMARK(BM_GsrOblique)->Unit(benchmark::kMillisecond);

void BM_Gsr3D(benchmark::State& state) {
  const Volume u0 = striped({128, 128, 16});
  SolverSettings s;
  s.max_iters = 20;
  for (auto _ : state) benchmark::DoNotOptimize(solve_gsr(u0, GsrParams{.rho_z = 0.5}, s));
  state.SetItemsProcessed(state.iterations() * 20);
}
BENCHMARK(BM_Gsr3D)->Unit(benchmark::kMillisecond);

void BM_VsnrIterations(benchmark::State& state) {
  const Volume u0 = striped({256, 256, 1});
  const auto patterns = make_gabor_patterns(StripeDirection::vertical());
  VsnrParams p;
  p.max_iters = 20;
  for (auto _ : state) benchmark::DoNotOptimize(solve_vsnr(u0, patterns, p));
  state.SetItemsProcessed(state.iterations() * 20);
}
BENCHMARK(BM_VsnrIterations)->Unit(benchmark::kMillisecond);

void BM_FourierFilter(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Volume u0 = striped({n, n, 1});
  for (auto _ : state) benchmark::DoNotOptimize(filter_volume(u0, FourierFilterParams{}));
}
BENCHMARK(BM_FourierFilter)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
