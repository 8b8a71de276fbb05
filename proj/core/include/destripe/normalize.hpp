#pragma once

#include <optional>
#include <span>
#include <vector>

#include "destripe/volume.hpp"

namespace destripe {

enum class SampleFormat { UInt8, UInt16, Float32 };

/// How raw samples are mapped onto [0, 1].
enum class NormalizeMode {
  Auto,      ///< bit depth for integer sources, min-max for float sources
  BitDepth,  ///< divide by 2^b - 1 (integer sources only)
  MinMax,    ///< affine min-max rescale
  Identity,  ///< values are taken as-is (float sources already in [0, 1])
};

/// Affine map raw -> (raw - offset) / scale, kept so export can invert it.
struct NormalizationRecord {
  SampleFormat format = SampleFormat::Float32;
  NormalizeMode mode = NormalizeMode::Identity;
  double offset = 0.0;
  double scale = 1.0;
  bool degenerate_range = false;
};

struct NormalizedVolume {
  Volume volume;
  NormalizationRecord record;
};

[[nodiscard]] double full_scale(SampleFormat format);
[[nodiscard]] bool is_integer(SampleFormat format);

NormalizedVolume normalize(std::span<const double> raw, Dims dims, SampleFormat format,
                           NormalizeMode mode = NormalizeMode::Auto);

/// Inverse of normalize. Integer targets are clamped to their range and
/// rounded half-to-even; float targets are the affine inverse rounded to float32.
std::vector<double> denormalize(const Volume& v, const std::optional<NormalizationRecord>& record);

}  // namespace destripe
