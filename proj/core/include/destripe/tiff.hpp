#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "destripe/normalize.hpp"
#include "destripe/volume.hpp"

namespace destripe::tiff {

/// Grayscale pages of one baseline TIFF, samples widened to double.
struct Stack {
  Dims dims;
  SampleFormat format = SampleFormat::UInt8;
  std::vector<double> samples;  ///< x fastest, then y, then page
  std::string description;      ///< ImageDescription of the first page, if any
};

/// Reads uncompressed, strip-organised, single-channel TIFFs (8/16-bit
/// unsigned or 32-bit float), either byte order, one or more pages.
Stack read(const std::filesystem::path& path);

/// Writes a little-endian, uncompressed, one-strip-per-page TIFF. Samples
/// must already be in range for the integer formats.
void write(const std::filesystem::path& path, const Stack& stack);

}  // namespace destripe::tiff
