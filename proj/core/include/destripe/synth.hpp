#pragma once

#include <cstdint>
#include <string>

#include "destripe/volume.hpp"

namespace destripe {

/// Name of the pseudo-random engine behind every generator (recorded in
/// output metadata so regressions stay portable).
inline constexpr const char* kSynthRng = "std::mt19937_64";

enum class PhantomStructure { Spheres, Blobs, Cells };

struct PhantomSpec {
  Dims dims{256, 256, 1};
  PhantomStructure structure = PhantomStructure::Blobs;
  std::size_t count = 12;
  double radius_min = 8.0;
  double radius_max = 28.0;
  double intensity_min = 0.2;
  double intensity_max = 0.5;
  double background = 0.2;
  double blur_sigma = 1.5;  ///< Gaussian smoothing, pixels (0 disables)

  void validate() const;
};

struct StripeSpec {
  StripeDirection direction = StripeDirection::vertical();
  double width_min = 1.0;  ///< pixels across the stripe
  double width_max = 3.0;
  /// Footprint across the stripe over which lane coverage is averaged; 1 is
  /// plain pixel-area coverage, larger values soften the edges.
  double edge_width = 1.0;
  bool full_length = true;  ///< otherwise stripes are split into segments
  double length_min = 16.0;  ///< segment length range when !full_length
  double length_max = 96.0;
  double amplitude_min = 0.05;
  double amplitude_max = 0.15;
  bool bipolar = true;  ///< random sign per stripe; otherwise all positive
  double density = 0.3;  ///< expected covered fraction of the image
  std::size_t depth_min = 1;  ///< z-extent (slices) sharing one stripe layout
  std::size_t depth_max = 1;

  void validate() const;
};

/// Values lie on a 2^-24 grid, as do stripe amplitudes, so a pair that needs
/// no clamping satisfies (clean + stripes) - stripes == clean exactly.
Volume make_phantom(const PhantomSpec& spec, std::uint64_t seed);

/// Signed field in [-1, 1] of elongated structures along spec.direction.
Volume make_stripes(const StripeSpec& spec, const Dims& dims, std::uint64_t seed);

struct CorruptedImage {
  Volume image;
  double clamped_fraction = 0.0;
  /// More than 5% of voxels were clamped; exact ground truth no longer holds.
  [[nodiscard]] bool unsuitable_for_ground_truth() const noexcept { return clamped_fraction > 0.05; }
};

/// clean + stripes, clamped to [0, 1].
CorruptedImage corrupt(const Volume& clean, const Volume& stripes);

std::string to_string(PhantomStructure s);
PhantomStructure phantom_structure_from_string(const std::string& s);

}  // namespace destripe
