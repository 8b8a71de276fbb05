#pragma once

#include <filesystem>
#include <string>

#include "destripe/normalize.hpp"
#include "destripe/volume.hpp"

namespace destripe {

enum class FileFormat { Tiff, Png, Raw };

/// Chosen from the extension: .tif/.tiff, .png, .raw/.f32.
FileFormat format_from_path(const std::filesystem::path& path);

struct LoadedImage {
  Volume volume;  ///< normalised to [0, 1]
  NormalizationRecord record;
  FileFormat file_format = FileFormat::Tiff;
  std::string description;
};

/// Raw float32 files are little-endian, x fastest, with a text sidecar
/// `<path>.dims` holding "nx ny nz".
std::filesystem::path raw_sidecar(const std::filesystem::path& path);

LoadedImage read_image(const std::filesystem::path& path, NormalizeMode mode = NormalizeMode::Auto);

enum class FieldKind { Image, Stripes };

struct ExportOptions {
  SampleFormat sample = SampleFormat::UInt16;
  /// Float exports only: write values as computed, without clipping or shifting.
  bool unclipped_float = false;
  FieldKind kind = FieldKind::Image;
  std::string description;  ///< extra metadata text (TIFF ImageDescription / PNG tEXt)
};

/// Images are clipped to [0, 1]; stripe fields are shifted by (s + 1) / 2
/// first. Integer formats are then scaled to full range and rounded half to
/// even. PNG accepts 2D integer data only; raw accepts float32 only.
void write_image(const Volume& v, const std::filesystem::path& path, const ExportOptions& options = {});

/// Samples as they will be stored (after shift, clip and quantisation).
std::vector<double> export_samples(const Volume& v, const ExportOptions& options);

}  // namespace destripe
