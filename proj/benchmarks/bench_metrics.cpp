#include <benchmark/benchmark.h>

#include "destripe/metrics.hpp"
#include "destripe/synth.hpp"

using namespace destripe;

namespace {

struct Pair {
  Volume clean;
  Volume striped;
};

Pair make_pair(std::size_t n) {
  PhantomSpec ps;
  ps.dims = {n, n, 1};
  Volume clean = make_phantom(ps, 3);
  Volume striped = corrupt(clean, make_stripes(StripeSpec{}, ps.dims, 4)).image;
  return {std::move(clean), std::move(striped)};
}

void BM_Psnr(benchmark::State& state) {
  const auto p = make_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(psnr(p.striped, p.clean));
}
BENCHMARK(BM_Psnr)->Arg(512);

void BM_MsSsim(benchmark::State& state) {
  const auto p = make_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ms_ssim(p.striped, p.clean));
}
BENCHMARK(BM_MsSsim)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Curtaining(benchmark::State& state) {
  const auto p = make_pair(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(curtaining(p.striped));
}
BENCHMARK(BM_Curtaining)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
