#include <doctest.h>

#include <cmath>
#include <numbers>

#include "destripe/synth.hpp"

using namespace destripe;

TEST_CASE("empty phantom is uniform background") {
  PhantomSpec ps;
  ps.dims = {20, 15, 3};
  ps.count = 0;
  ps.background = 0.25;
  const Volume v = make_phantom(ps, 1);
  CHECK(v.min() == 0.25);
  CHECK(v.max() == 0.25);
}

TEST_CASE("phantoms are deterministic and in range") {
  for (auto st : {PhantomStructure::Spheres, PhantomStructure::Blobs, PhantomStructure::Cells}) {
    PhantomSpec ps;
    ps.dims = {48, 40, 2};
    ps.structure = st;
    const Volume a = make_phantom(ps, 77);
    CHECK(a == make_phantom(ps, 77));
    CHECK_FALSE(a == make_phantom(ps, 78));
    CHECK(a.min() >= 0.0);
    CHECK(a.max() <= 1.0);
    // Values sit on the 2^-24 grid.
    for (double v : a.values()) CHECK(std::ldexp(v, 24) == std::nearbyint(std::ldexp(v, 24)));
  }
}

TEST_CASE("sphere interior lies above background") {
  const double r = 9.0;
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 40 && checked < 5; ++seed) {
    PhantomSpec ps;
    ps.dims = {64, 64, 1};
    ps.structure = PhantomStructure::Spheres;
    ps.count = 1;
    ps.radius_min = ps.radius_max = r;
    ps.blur_sigma = 0.0;
    const Volume v = make_phantom(ps, seed);
    double sx = 0, sy = 0, n = 0;
    bool touches_border = false;
    for (std::size_t y = 0; y < 64; ++y) {
      for (std::size_t x = 0; x < 64; ++x) {
        if (v(x, y) <= ps.background + 1e-6) continue;
        sx += static_cast<double>(x);
        sy += static_cast<double>(y);
        ++n;
        touches_border = touches_border || x == 0 || y == 0 || x == 63 || y == 63;
      }
    }
    if (touches_border) continue;
    ++checked;
    CHECK(n == doctest::Approx(std::numbers::pi * r * r).epsilon(0.1));
    const double cx = sx / n;
    const double cy = sy / n;
    for (std::size_t y = 0; y < 64; ++y) {
      for (std::size_t x = 0; x < 64; ++x) {
        const double dist = std::hypot(static_cast<double>(x) - cx, static_cast<double>(y) - cy);
        if (dist <= r - 1.0) CHECK(v(x, y) > ps.background + 1e-6);
        if (dist > r + 1.0) CHECK(v(x, y) == doctest::Approx(ps.background).epsilon(1e-7));
      }
    }
  }
  CHECK(checked == 5);
}

TEST_CASE("zero density gives a zero field") {
  StripeSpec ss;
  ss.density = 0.0;
  const Volume f = make_stripes(ss, Dims{30, 20, 2}, 3);
  CHECK(f.max() == 0.0);
  CHECK(f.min() == 0.0);
}

TEST_CASE("vertical full-length unit-width stripes are constant columns") {
  StripeSpec ss;
  ss.width_min = ss.width_max = 1.0;
  ss.density = 0.5;
  const Volume f = make_stripes(ss, Dims{40, 25, 1}, 4);
  std::size_t active = 0;
  for (std::size_t x = 0; x < 40; ++x) {
    for (std::size_t y = 1; y < 25; ++y) CHECK(f(x, y) == f(x, 0));
    if (f(x, 0) != 0.0) {
      ++active;
      CHECK(std::abs(f(x, 0)) >= ss.amplitude_min - 1e-7);
      CHECK(std::abs(f(x, 0)) <= ss.amplitude_max + 1e-7);
    }
  }
  CHECK(active > 5);
  CHECK(active < 35);
}

TEST_CASE("stripe fields are deterministic, bounded and elongated") {
  for (double t : {std::numbers::pi / 2, 0.0, 1.2, std::numbers::pi / 2 + 0.1}) {
    StripeSpec ss;
    ss.direction = StripeDirection(t);
    ss.amplitude_max = 1.0;
    ss.amplitude_min = 0.5;
    ss.full_length = t != 0.0;
    const Dims d{50, 40, 1};
    const Volume f = make_stripes(ss, d, 5);
    CHECK(f == make_stripes(ss, d, 5));
    CHECK(f.min() >= -1.0);
    CHECK(f.max() <= 1.0);
    // Smaller variation along the stripe than across it.
    const double c = ss.direction.dx();
    const double s = ss.direction.dy();
    double along = 0.0;
    double across = 0.0;
    for (std::size_t y = 2; y + 2 < d.ny; ++y) {
      for (std::size_t x = 2; x + 2 < d.nx; ++x) {
        auto sample = [&](double px, double py) {
          return f(static_cast<std::size_t>(std::lround(px)), static_cast<std::size_t>(std::lround(py)));
        };
        along += std::abs(sample(x + 2 * c, y + 2 * s) - f(x, y));
        across += std::abs(sample(x - 2 * s, y + 2 * c) - f(x, y));
      }
    }
    CHECK(along < across);
  }
}

TEST_CASE("mean stripe magnitude follows density and amplitude") {
  // Unipolar lanes add coverage linearly; unit-width bipolar lanes never overlap.
  for (bool bipolar : {false, true}) {
    StripeSpec ss;
    ss.bipolar = bipolar;
    if (bipolar) ss.width_min = ss.width_max = 1.0;
    ss.density = 0.25;
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Volume f = make_stripes(ss, Dims{128, 64, 1}, seed);
      for (double v : f.values()) mean += std::abs(v);
    }
    mean /= 10.0 * 128 * 64;
    const double expected = ss.density * 0.5 * (ss.amplitude_min + ss.amplitude_max);
    INFO("bipolar=" << bipolar << " mean=" << mean << " expected=" << expected);
    CHECK(mean == doctest::Approx(expected).epsilon(0.1));
  }
}

TEST_CASE("segmented stripes and depth") {
  StripeSpec ss;
  ss.full_length = false;
  ss.length_min = 5;
  ss.length_max = 10;
  ss.density = 0.6;
  ss.depth_min = ss.depth_max = 2;
  const Volume f = make_stripes(ss, Dims{40, 60, 4}, 6);
  // Some column changes value along y.
  bool varies = false;
  for (std::size_t x = 0; x < 40 && !varies; ++x) {
    for (std::size_t y = 1; y < 60; ++y) varies = varies || f(x, y, 0) != f(x, 0, 0);
  }
  CHECK(varies);
  CHECK(f.slice(0) == f.slice(1));
  CHECK(f.slice(2) == f.slice(3));
  CHECK_FALSE(f.slice(1) == f.slice(2));
}

TEST_CASE("corrupt examples") {
  const Volume clean(Dims{6, 5, 1}, 0.5);
  const auto same = corrupt(clean, Volume(clean.dims(), 0.0));
  CHECK(same.image == clean);
  CHECK(same.clamped_fraction == 0.0);
  Volume col(clean.dims(), 0.0);
  for (std::size_t y = 0; y < 5; ++y) col(2, y) = 0.2;
  const auto c = corrupt(clean, col);
  for (std::size_t y = 0; y < 5; ++y) {
    CHECK(c.image(2, y) == doctest::Approx(0.7));
    CHECK(c.image(1, y) == 0.5);
  }
  CHECK_THROWS_AS(corrupt(clean, Volume(Dims{5, 5, 1}, 0.0)), Error);
}

TEST_CASE("clamped fraction matches a direct count") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    PhantomSpec ps;
    ps.dims = {64, 64, 1};
    ps.intensity_min = 0.5;
    ps.intensity_max = 0.9;
    ps.background = 0.05;
    StripeSpec ss;
    ss.amplitude_min = 0.2;
    ss.amplitude_max = 0.5;
    const Volume clean = make_phantom(ps, seed);
    const Volume stripes = make_stripes(ss, ps.dims, seed + 10);
    const auto out = corrupt(clean, stripes);
    std::size_t n = 0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const double v = clean[i] + stripes[i];
      n += v < 0.0 || v > 1.0;
      CHECK(out.image[i] == std::min(1.0, std::max(0.0, v)));
    }
    CHECK(out.clamped_fraction == static_cast<double>(n) / static_cast<double>(clean.size()));
    CHECK(out.unsuitable_for_ground_truth() == (out.clamped_fraction > 0.05));
  }
}

TEST_CASE("unclamped default pairs give exact ground truth") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PhantomSpec ps;
    ps.dims = {96, 96, 1};
    ps.structure = static_cast<PhantomStructure>(seed % 3);
    const Volume clean = make_phantom(ps, seed);
    const Volume stripes = make_stripes(StripeSpec{}, ps.dims, seed ^ 0x9e3779b97f4a7c15ULL);
    const auto out = corrupt(clean, stripes);
    CHECK_FALSE(out.unsuitable_for_ground_truth());
    if (out.clamped_fraction > 0.0) continue;
    ++exact;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      CHECK(out.image[i] - stripes[i] == clean[i]);
      CHECK(static_cast<double>(static_cast<float>(out.image[i])) == out.image[i]);
    }
  }
  CHECK(exact >= 5);
}

TEST_CASE("spec validation") {
  PhantomSpec ps;
  ps.dims = {0, 4, 1};
  CHECK_THROWS_AS(make_phantom(ps, 1), Error);
  ps = {};
  ps.radius_max = 1.0;
  CHECK_THROWS_AS(make_phantom(ps, 1), Error);
  ps = {};
  ps.background = 1.5;
  CHECK_THROWS_AS(make_phantom(ps, 1), Error);
  StripeSpec ss;
  ss.density = 1.5;
  CHECK_THROWS_AS(make_stripes(ss, Dims{4, 4, 1}, 1), Error);
  ss = {};
  ss.amplitude_max = 2.0;
  CHECK_THROWS_AS(make_stripes(ss, Dims{4, 4, 1}, 1), Error);
  ss = {};
  ss.edge_width = 0.0;
  CHECK_THROWS_AS(make_stripes(ss, Dims{4, 4, 1}, 1), Error);
  CHECK(phantom_structure_from_string("cells") == PhantomStructure::Cells);
  CHECK(to_string(PhantomStructure::Spheres) == "spheres");
  CHECK_THROWS_AS(phantom_structure_from_string("cubes"), Error);
}
