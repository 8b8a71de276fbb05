#include "destripe/normalize.hpp"

#include <algorithm>
#include <cmath>

namespace destripe {

double full_scale(SampleFormat format) {
  switch (format) {
    case SampleFormat::UInt8: return 255.0;
    case SampleFormat::UInt16: return 65535.0;
    case SampleFormat::Float32: return 1.0;
  }
  return 1.0;
}

bool is_integer(SampleFormat format) { return format != SampleFormat::Float32; }

NormalizedVolume normalize(std::span<const double> raw, Dims dims, SampleFormat format,
                           NormalizeMode mode) {
  if (raw.size() != dims.size()) throw Error("normalize: sample count does not match dims");
  if (!std::all_of(raw.begin(), raw.end(), [](double v) { return std::isfinite(v); })) {
    throw Error("normalize: non-finite input sample");
  }
  if (mode == NormalizeMode::Auto) {
    mode = is_integer(format) ? NormalizeMode::BitDepth : NormalizeMode::MinMax;
  }
  if (mode == NormalizeMode::BitDepth && !is_integer(format)) {
    throw Error("normalize: bit-depth scaling needs an integer sample format");
  }

  NormalizationRecord rec;
  rec.format = format;
  rec.mode = mode;
  switch (mode) {
    case NormalizeMode::BitDepth:
      rec.scale = full_scale(format);
      break;
    case NormalizeMode::MinMax: {
      const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
      if (*lo == *hi) {
        // Constant field: land on the constant clamped into the box.
        rec.degenerate_range = true;
        rec.offset = *lo - std::clamp(*lo, 0.0, 1.0);
      } else {
        rec.offset = *lo;
        rec.scale = *hi - *lo;
      }
      break;
    }
    case NormalizeMode::Identity:
      if (!std::all_of(raw.begin(), raw.end(), [](double v) { return v >= 0.0 && v <= 1.0; })) {
        throw Error("normalize: identity mode needs samples in [0, 1]");
      }
      break;
    case NormalizeMode::Auto:
      break;
  }

  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - rec.offset) / rec.scale;
  return {Volume(dims, std::move(out)), rec};
}

std::vector<double> denormalize(const Volume& v, const std::optional<NormalizationRecord>& record) {
  if (!record) throw Error("denormalize: missing normalization record");
  const auto& rec = *record;
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double raw = v[i] * rec.scale + rec.offset;
    if (is_integer(rec.format)) {
      // nearbyint honours the default FE_TONEAREST mode: ties go to even.
      raw = std::clamp(std::nearbyint(raw), 0.0, full_scale(rec.format));
    } else {
      // Float sources are float32 samples; rounding back to float32 undoes
      // the double-precision error of the affine map exactly.
      raw = static_cast<double>(static_cast<float>(raw));
    }
    out[i] = raw;
  }
  return out;
}

}  // namespace destripe
