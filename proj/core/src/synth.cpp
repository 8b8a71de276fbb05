#include "destripe/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace destripe {
namespace {

// Distributions are built from raw engine output so that sequences do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

void gaussian_blur_axis(Volume& v, Axis axis, double sigma) {
  const Dims d = v.dims();
  const std::size_t n = axis == Axis::X ? d.nx : axis == Axis::Y ? d.ny : d.nz;
  if (n < 2) return;
  const std::size_t step = axis == Axis::X ? 1 : axis == Axis::Y ? d.nx : d.nx * d.ny;
  const auto radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (long k = -radius; k <= radius; ++k) {
    const double w = std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (double& t : taps) t /= sum;

  std::vector<double> line(n);
  const Volume src = v;
  for (std::size_t start = 0; start < d.size(); ++start) {
    // Visit each line once, from its first sample.
    const std::size_t coord = (start / step) % n;
    if (coord != 0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (long k = -radius; k <= radius; ++k) {
        const long j = std::clamp(static_cast<long>(i) + k, 0L, static_cast<long>(n) - 1);
        acc += taps[static_cast<std::size_t>(k + radius)] * src[start + static_cast<std::size_t>(j) * step];
      }
      line[i] = acc;
    }
    for (std::size_t i = 0; i < n; ++i) v[start + i * step] = line[i];
  }
}

// Generated values are snapped to a dyadic grid so that clean + stripes and
// the difference back are exact in double precision.
double snap(double v) { return std::nearbyint(std::ldexp(v, 24)) * 0x1.0p-24; }

struct Object {
  double cx, cy, cz, radius, intensity;
};

double object_value(PhantomStructure s, const Object& o, double r) {
  switch (s) {
    case PhantomStructure::Spheres:
      return r <= o.radius ? o.intensity : 0.0;
    case PhantomStructure::Blobs: {
      const double w = o.radius / 2.0;
      return o.intensity * std::exp(-r * r / (2.0 * w * w));
    }
    case PhantomStructure::Cells:
      if (r > o.radius) return 0.0;
      if (r >= 0.7 * o.radius) return o.intensity;           // membrane
      if (r <= 0.35 * o.radius) return 0.3 * o.intensity;    // nucleus
      return 0.6 * o.intensity;                               // cytoplasm
  }
  return 0.0;
}

}  // namespace

void PhantomSpec::validate() const {
  if (!dims.valid()) throw Error("phantom: dims must be positive, got " + to_string(dims));
  if (!(radius_min > 0.0) || radius_max < radius_min) throw Error("phantom: invalid radius range");
  if (intensity_min < 0.0 || intensity_max > 1.0 || intensity_max < intensity_min) {
    throw Error("phantom: intensity range must lie in [0, 1]");
  }
  if (!(background >= 0.0 && background <= 1.0)) throw Error("phantom: background must lie in [0, 1]");
  if (blur_sigma < 0.0) throw Error("phantom: blur sigma must be non-negative");
}

void StripeSpec::validate() const {
  if (!(width_min > 0.0) || width_max < width_min) throw Error("stripes: invalid width range");
  if (!(edge_width > 0.0) || !std::isfinite(edge_width)) throw Error("stripes: edge width must be positive");
  if (!full_length && (!(length_min > 0.0) || length_max < length_min)) throw Error("stripes: invalid length range");
  if (amplitude_min < 0.0 || amplitude_max > 1.0 || amplitude_max < amplitude_min) {
    throw Error("stripes: amplitude range must lie in [0, 1]");
  }
  if (!(density >= 0.0 && density <= 1.0)) throw Error("stripes: density must lie in [0, 1]");
  if (depth_min == 0 || depth_max < depth_min) throw Error("stripes: invalid depth range");
}

Volume make_phantom(const PhantomSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  const Dims d = spec.dims;
  std::vector<Object> objects(spec.count);
  for (auto& o : objects) {
    o.cx = rng.uniform(0.0, static_cast<double>(d.nx - 1));
    o.cy = rng.uniform(0.0, static_cast<double>(d.ny - 1));
    o.cz = d.is_2d() ? 0.0 : rng.uniform(0.0, static_cast<double>(d.nz - 1));
    o.radius = rng.uniform(spec.radius_min, spec.radius_max);
    o.intensity = rng.uniform(spec.intensity_min, spec.intensity_max);
  }

  Volume v(d, spec.background);
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        double val = spec.background;
        double blob_sum = 0.0;
        for (const auto& o : objects) {
          const double r = std::sqrt(std::pow(static_cast<double>(x) - o.cx, 2) +
                                     std::pow(static_cast<double>(y) - o.cy, 2) +
                                     std::pow(static_cast<double>(z) - o.cz, 2));
          const double ov = object_value(spec.structure, o, r);
          if (spec.structure == PhantomStructure::Blobs) {
            blob_sum += ov;
          } else if (ov > 0.0) {
            val = std::max(val, spec.background + ov);
          }
        }
        v(x, y, z) = std::clamp(val + blob_sum, 0.0, 1.0);
      }
    }
  }
  if (spec.blur_sigma > 0.0 && spec.count > 0) {
    gaussian_blur_axis(v, Axis::X, spec.blur_sigma);
    gaussian_blur_axis(v, Axis::Y, spec.blur_sigma);
    gaussian_blur_axis(v, Axis::Z, spec.blur_sigma);
  }
  for (double& val : v.values()) val = snap(std::clamp(val, 0.0, 1.0));
  return v;
}

Volume make_stripes(const StripeSpec& spec, const Dims& dims, std::uint64_t seed) {
  spec.validate();
  if (!dims.valid()) throw Error("stripes: dims must be positive");
  Rng rng(seed);
  Volume field(dims, 0.0);
  if (spec.density == 0.0) return field;

  const double cx = spec.direction.dx();
  const double cy = spec.direction.dy();
  const double half = spec.edge_width / 2.0;
  // Pixel (x, y) sits at 'along' = x cx + y cy on the stripe axis and at
  // 'perp' = x cy - y cx across it.
  const double w = static_cast<double>(dims.nx - 1);
  const double h = static_cast<double>(dims.ny - 1);
  const double corners_perp[] = {0.0, w * cy, -h * cx, w * cy - h * cx};
  const double corners_along[] = {0.0, w * cx, h * cy, w * cx + h * cy};
  const double perp_lo = *std::min_element(std::begin(corners_perp), std::end(corners_perp)) - half;
  const double perp_hi = *std::max_element(std::begin(corners_perp), std::end(corners_perp)) + half;
  const double along_lo = *std::min_element(std::begin(corners_along), std::end(corners_along));
  const double along_hi = *std::max_element(std::begin(corners_along), std::end(corners_along)) + 1.0;

  // Segments cover half of a lane in expectation.
  const double activation = spec.full_length ? spec.density : std::min(1.0, 2.0 * spec.density);

  struct Segment {
    double begin, end;
  };
  struct Lane {
    double begin, end, amplitude;
    std::vector<Segment> segments;
  };

  std::size_t z0 = 0;
  while (z0 < dims.nz) {
    const std::size_t depth = std::min(rng.integer(spec.depth_min, spec.depth_max), dims.nz - z0);
    std::vector<Lane> lanes;
    for (double t = perp_lo; t < perp_hi;) {
      Lane lane;
      lane.begin = t;
      lane.end = t + rng.uniform(spec.width_min, spec.width_max);
      const bool active = rng.bernoulli(activation);
      double amp = rng.uniform(spec.amplitude_min, spec.amplitude_max);
      if (spec.bipolar && rng.bernoulli(0.5)) amp = -amp;
      lane.amplitude = active ? amp : 0.0;
      if (active && !spec.full_length) {
        double a = along_lo - rng.uniform(0.0, spec.length_max);
        bool on = rng.bernoulli(0.5);
        while (a < along_hi) {
          const double len = rng.uniform(spec.length_min, spec.length_max);
          if (on) lane.segments.push_back({a, a + len});
          a += len;
          on = !on;
        }
      }
      t = lane.end;
      lanes.push_back(std::move(lane));
    }

    for (std::size_t z = z0; z < z0 + depth; ++z) {
      for (std::size_t y = 0; y < dims.ny; ++y) {
        for (std::size_t x = 0; x < dims.nx; ++x) {
          const double fx = static_cast<double>(x);
          const double fy = static_cast<double>(y);
          const double perp = fx * cy - fy * cx;
          const double along = fx * cx + fy * cy;
          // Coverage of the footprint [perp - e/2, perp + e/2] by each lane.
          double value = 0.0;
          auto it = std::upper_bound(lanes.begin(), lanes.end(), perp - half,
                                     [](double p, const Lane& l) { return p < l.end; });
          for (; it != lanes.end() && it->begin < perp + half; ++it) {
            if (it->amplitude == 0.0) continue;
            if (!spec.full_length) {
              const bool covered = std::any_of(it->segments.begin(), it->segments.end(), [&](const Segment& s) {
                return along >= s.begin && along < s.end;
              });
              if (!covered) continue;
            }
            const double overlap = std::min(perp + half, it->end) - std::max(perp - half, it->begin);
            value += it->amplitude * std::max(overlap, 0.0) / spec.edge_width;
          }
          field(x, y, z) = snap(std::clamp(value, -1.0, 1.0));
        }
      }
    }
    z0 += depth;
  }
  return field;
}

CorruptedImage corrupt(const Volume& clean, const Volume& stripes) {
  require_same_dims(clean.dims(), stripes.dims(), "corrupt");
  CorruptedImage out{Volume(clean.dims()), 0.0};
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double v = clean[i] + stripes[i];
    if (v < 0.0 || v > 1.0) ++clamped;
    out.image[i] = std::clamp(v, 0.0, 1.0);
  }
  out.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(clean.size());
  return out;
}

std::string to_string(PhantomStructure s) {
  switch (s) {
    case PhantomStructure::Spheres: return "spheres";
    case PhantomStructure::Blobs: return "blobs";
    case PhantomStructure::Cells: return "cells";
  }
  return "blobs";
}

PhantomStructure phantom_structure_from_string(const std::string& s) {
  if (s == "spheres") return PhantomStructure::Spheres;
  if (s == "blobs") return PhantomStructure::Blobs;
  if (s == "cells") return PhantomStructure::Cells;
  throw Error("unknown phantom structure '" + s + "' (expected spheres, blobs or cells)");
}

}  // namespace destripe
