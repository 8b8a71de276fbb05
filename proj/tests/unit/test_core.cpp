#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

#include "destripe/normalize.hpp"
#include "destripe/parallel.hpp"
#include "destripe/volume.hpp"
#include "test_util.hpp"

using namespace destripe;

TEST_CASE("volume layout and invariants") {
  Volume v(Dims{3, 4, 2}, 0.25);
  CHECK(v.size() == 24);
  CHECK(v.index(1, 2, 1) == 1 + 3 * (2 + 4 * 1));
  v(2, 3, 1) = 0.75;
  CHECK(v[v.index(2, 3, 1)] == 0.75);
  CHECK_FALSE(v.is_2d());
  CHECK(Volume(Dims{5, 5, 1}).is_2d());
  CHECK_THROWS_AS(Volume(Dims{0, 3, 1}), Error);
  CHECK_THROWS_AS(Volume(Dims{2, 2, 1}, std::vector<double>(3)), Error);
}

TEST_CASE("slices round trip") {
  const Volume v = testutil::random_volume({4, 3, 3}, 1);
  Volume w(v.dims());
  for (std::size_t z = 0; z < 3; ++z) w.set_slice(z, v.slice(z));
  CHECK(w == v);
  CHECK_THROWS_AS((void)v.slice(3), Error);
}

TEST_CASE("stripe direction normalisation") {
  CHECK(StripeDirection(std::numbers::pi).radians() == 0.0);
  CHECK(StripeDirection(-std::numbers::pi / 2).radians() == doctest::Approx(std::numbers::pi / 2));
  CHECK(StripeDirection::vertical().dx() == 0.0);
  CHECK(StripeDirection::vertical().dy() == 1.0);
  CHECK(StripeDirection::horizontal().is_horizontal());
  CHECK(StripeDirection::vertical().is_vertical());
  for (double t : {0.0, 0.3, 1.0, 2.0, 3.1, 7.5, -4.0}) {
    const double r = StripeDirection(t).radians();
    CHECK(r >= 0.0);
    CHECK(r < std::numbers::pi);
  }
  CHECK_THROWS_AS(StripeDirection(std::nan("")), Error);
}

TEST_CASE("decomposition reconstructs the input") {
  const Volume u0 = testutil::random_volume({6, 5, 2}, 2);
  const Volume u = testutil::random_volume({6, 5, 2}, 3);
  const auto d = StripeDecomposition::from_clean(u0, u);
  CHECK(max_abs_diff(d.reconstruct().values(), u0.values()) <= 1e-12);
  CHECK_THROWS_AS(StripeDecomposition::from_clean(u0, Volume(Dims{6, 5, 1})), Error);
}

TEST_CASE("normalize examples") {
  const std::vector<double> eight{0.0, 255.0};
  auto n8 = normalize(eight, {2, 1, 1}, SampleFormat::UInt8);
  CHECK(n8.volume[1] == 1.0);
  CHECK(n8.record.mode == NormalizeMode::BitDepth);

  const std::vector<double> sixteen{0.0, 65535.0};
  CHECK(normalize(sixteen, {2, 1, 1}, SampleFormat::UInt16).volume[0] == 0.0);

  const std::vector<double> floats{2.0, 3.0, 4.0};
  auto nf = normalize(floats, {3, 1, 1}, SampleFormat::Float32);
  CHECK(nf.volume[1] == 0.5);
  CHECK(nf.record.mode == NormalizeMode::MinMax);
}

TEST_CASE("normalize degenerate float range") {
  const std::vector<double> c{2.5, 2.5};
  auto n = normalize(c, {2, 1, 1}, SampleFormat::Float32);
  CHECK(n.record.degenerate_range);
  CHECK(n.volume[0] == 1.0);
  const std::vector<double> inside{0.4, 0.4};
  CHECK(normalize(inside, {2, 1, 1}, SampleFormat::Float32).volume[1] == 0.4);
  const std::vector<double> below{-3.0};
  CHECK(normalize(below, {1, 1, 1}, SampleFormat::Float32).volume[0] == 0.0);
}

TEST_CASE("normalize rejects bad input") {
  const std::vector<double> bad{0.0, std::nan("")};
  CHECK_THROWS_AS(normalize(bad, {2, 1, 1}, SampleFormat::Float32), Error);
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(normalize(two, {3, 1, 1}, SampleFormat::Float32), Error);
  CHECK_THROWS_AS(normalize(two, {2, 1, 1}, SampleFormat::Float32, NormalizeMode::BitDepth), Error);
  CHECK_THROWS_AS(normalize(two, {2, 1, 1}, SampleFormat::Float32, NormalizeMode::Identity), Error);
}

TEST_CASE("denormalize examples") {
  NormalizationRecord r8{SampleFormat::UInt8, NormalizeMode::BitDepth, 0.0, 255.0, false};
  // 0.5 * 255 = 127.5 ties to the even neighbour.
  CHECK(denormalize(Volume(Dims{1, 1, 1}, 0.5), r8)[0] == 128.0);
  NormalizationRecord r16{SampleFormat::UInt16, NormalizeMode::BitDepth, 0.0, 65535.0, false};
  CHECK(denormalize(Volume(Dims{1, 1, 1}, 1.0), r16)[0] == 65535.0);
  NormalizationRecord rf{SampleFormat::Float32, NormalizeMode::MinMax, 2.0, 2.0, false};
  CHECK(denormalize(Volume(Dims{1, 1, 1}, 0.25), rf)[0] == 2.5);
  CHECK_THROWS_AS(denormalize(Volume(Dims{1, 1, 1}, 0.25), std::nullopt), Error);
  // Out-of-range values saturate for integer targets.
  CHECK(denormalize(Volume(Dims{1, 1, 1}, 1.3), r8)[0] == 255.0);
  CHECK(denormalize(Volume(Dims{1, 1, 1}, -0.2), r8)[0] == 0.0);
}

TEST_CASE("round half to even on quantisation") {
  NormalizationRecord r8{SampleFormat::UInt8, NormalizeMode::BitDepth, 0.0, 255.0, false};
  Volume v(Dims{2, 1, 1});
  v[0] = 2.5 / 255.0;
  v[1] = 3.5 / 255.0;
  const auto raw = denormalize(v, r8);
  CHECK(raw[0] == 2.0);
  CHECK(raw[1] == 4.0);
}

TEST_CASE("normalize then denormalize round trips") {
  std::mt19937_64 rng(11);
  for (auto fmt : {SampleFormat::UInt8, SampleFormat::UInt16}) {
    std::uniform_int_distribution<int> d(0, static_cast<int>(full_scale(fmt)));
    std::vector<double> raw(200);
    for (double& r : raw) r = d(rng);
    const auto n = normalize(raw, {20, 10, 1}, fmt);
    const auto back = denormalize(n.volume, n.record);
    for (std::size_t i = 0; i < raw.size(); ++i) CHECK(back[i] == raw[i]);
  }
  // Float sources (float32 samples) come back bit-exact.
  std::uniform_real_distribution<float> f(-40.0f, 1000.0f);
  std::vector<double> raw(500);
  for (double& r : raw) r = static_cast<double>(f(rng));
  const auto n = normalize(raw, {25, 20, 1}, SampleFormat::Float32);
  CHECK(n.volume.min() == 0.0);
  CHECK(n.volume.max() == 1.0);
  const auto back = denormalize(n.volume, n.record);
  for (std::size_t i = 0; i < raw.size(); ++i) CHECK(back[i] == raw[i]);
}

TEST_CASE("parallel_for visits every index once") {
  for (const char* threads : {"1", "3", "0"}) {
    setenv("DESTRIPE_THREADS", threads, 1);
    if (std::string(threads) != "0") CHECK(thread_count() == std::stoul(threads));
    CHECK(thread_count() >= 1);
    std::vector<std::atomic<int>> hits(97);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) {
                      if (i == 7) throw Error("boom");
                    }),
                    Error);
  }
  unsetenv("DESTRIPE_THREADS");
}
