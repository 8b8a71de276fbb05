#include "destripe/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

#include "destripe/tiff.hpp"

namespace destripe {
namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& why) {
  throw Error(path.string() + ": " + why);
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Keeps libpng quiet on stderr; the message is reported through the exception.
void png_error_to_string(png_structp png, png_const_charp msg) {
  if (auto* out = static_cast<std::string*>(png_get_error_ptr(png))) *out = msg;
  png_longjmp(png, 1);
}
void png_ignore_warning(png_structp, png_const_charp) {}

struct PngRaw {
  Dims dims;
  SampleFormat format = SampleFormat::UInt8;
  std::vector<double> samples;
};

PngRaw read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(path, "cannot open file");
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) fail(path, "not a PNG file");

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_to_string, png_ignore_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "libpng initialisation failed");
  }
  PngRaw out;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, error.empty() ? "corrupt or truncated PNG" : "corrupt or truncated PNG (" + error + ")");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "only single-channel grayscale PNG is supported (got RGB, palette or alpha)");
  }
  if (bit_depth != 8 && bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unsupported PNG bit depth " + std::to_string(bit_depth));
  }
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * height);
  std::vector<png_bytep> rows(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  out.dims = Dims{width, height, 1};
  out.format = bit_depth == 8 ? SampleFormat::UInt8 : SampleFormat::UInt16;
  out.samples.resize(out.dims.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    out.samples[i] = bit_depth == 8 ? buffer[i]
                                    : static_cast<double>((static_cast<unsigned>(buffer[2 * i]) << 8) | buffer[2 * i + 1]);
  }
  return out;
}

// Kept separate so no caller locals live across setjmp.
bool emit_png(png_structp png, png_infop info, std::FILE* fp, const Dims& dims, int depth, png_bytepp rows,
              const std::string& description) {
  png_text text{};
  std::string key = "Description";
  std::string value = description;
  if (setjmp(png_jmpbuf(png))) return false;
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(dims.nx), static_cast<png_uint_32>(dims.ny), depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (!value.empty()) {
    text.compression = PNG_TEXT_COMPRESSION_NONE;
    text.key = key.data();
    text.text = value.data();
    png_set_text(png, info, &text, 1);
  }
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  return true;
}

void write_png(const std::filesystem::path& path, const Dims& dims, SampleFormat format,
               const std::vector<double>& samples, const std::string& description) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(path, "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_to_string, png_ignore_warning);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(path, "libpng initialisation failed");
  }
  const int depth = format == SampleFormat::UInt8 ? 8 : 16;
  const std::size_t bpp = static_cast<std::size_t>(depth / 8);
  std::vector<png_byte> buffer(dims.size() * bpp);
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto v = static_cast<unsigned>(samples[i]);
    if (depth == 8) {
      buffer[i] = static_cast<png_byte>(v);
    } else {
      buffer[2 * i] = static_cast<png_byte>(v >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(v & 0xff);
    }
  }
  std::vector<png_bytep> rows(dims.ny);
  for (std::size_t y = 0; y < dims.ny; ++y) rows[y] = buffer.data() + y * dims.nx * bpp;

  const bool ok = emit_png(png, info, fp.get(), dims, depth, rows.data(), description);
  png_destroy_write_struct(&png, &info);
  if (!ok || std::fflush(fp.get()) != 0) fail(path, "PNG write failed");
}

Dims read_sidecar(const std::filesystem::path& path) {
  const auto side = raw_sidecar(path);
  std::ifstream in(side);
  if (!in) fail(path, "missing dims sidecar " + side.string());
  Dims d{0, 0, 0};
  if (!(in >> d.nx >> d.ny >> d.nz) || !d.valid()) fail(side, "expected three positive integers 'nx ny nz'");
  return d;
}

}  // namespace

FileFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".tif" || ext == ".tiff") return FileFormat::Tiff;
  if (ext == ".png") return FileFormat::Png;
  if (ext == ".raw" || ext == ".f32") return FileFormat::Raw;
  fail(path, "unrecognised image extension '" + ext + "' (expected .tif, .tiff, .png, .raw or .f32)");
}

std::filesystem::path raw_sidecar(const std::filesystem::path& path) {
  auto p = path;
  p += ".dims";
  return p;
}

LoadedImage read_image(const std::filesystem::path& path, NormalizeMode mode) {
  if (!std::filesystem::exists(path)) fail(path, "file does not exist");
  LoadedImage out;
  out.file_format = format_from_path(path);
  Dims dims;
  SampleFormat format = SampleFormat::Float32;
  std::vector<double> samples;
  switch (out.file_format) {
    case FileFormat::Tiff: {
      auto stack = tiff::read(path);
      dims = stack.dims;
      format = stack.format;
      samples = std::move(stack.samples);
      out.description = std::move(stack.description);
      break;
    }
    case FileFormat::Png: {
      auto png = read_png(path);
      dims = png.dims;
      format = png.format;
      samples = std::move(png.samples);
      break;
    }
    case FileFormat::Raw: {
      dims = read_sidecar(path);
      std::ifstream in(path, std::ios::binary);
      if (!in) fail(path, "cannot open file");
      std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (bytes.size() != dims.size() * 4) {
        fail(path, "raw file holds " + std::to_string(bytes.size()) + " bytes, expected " +
                       std::to_string(dims.size() * 4) + " for dims " + to_string(dims));
      }
      samples.resize(dims.size());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::uint32_t u = static_cast<std::uint32_t>(bytes[4 * i]) | (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                                (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                                (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
        samples[i] = static_cast<double>(std::bit_cast<float>(u));
      }
      break;
    }
  }
  try {
    auto norm = normalize(samples, dims, format, mode);
    out.volume = std::move(norm.volume);
    out.record = norm.record;
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return out;
}

std::vector<double> export_samples(const Volume& v, const ExportOptions& options) {
  const bool integer = is_integer(options.sample);
  if (options.unclipped_float && integer) throw Error("unclipped export requires the float32 sample format");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double x = v[i];
    if (options.unclipped_float) {
      out[i] = x;
      continue;
    }
    if (options.kind == FieldKind::Stripes) x = (x + 1.0) / 2.0;
    x = std::clamp(x, 0.0, 1.0);
    if (integer) x = std::nearbyint(x * full_scale(options.sample));
    out[i] = x;
  }
  return out;
}

void write_image(const Volume& v, const std::filesystem::path& path, const ExportOptions& options) {
  const FileFormat ff = format_from_path(path);
  if (path.has_parent_path() && !std::filesystem::is_directory(path.parent_path())) {
    fail(path, "parent directory does not exist");
  }
  std::string description = options.description;
  if (options.kind == FieldKind::Stripes) {
    const char* note = options.unclipped_float ? "stripe field: signed values s" : "stripe field: stored as (s+1)/2";
    description = description.empty() ? note : std::string(note) + "; " + description;
  }
  const auto samples = export_samples(v, options);
  switch (ff) {
    case FileFormat::Tiff:
      tiff::write(path, tiff::Stack{v.dims(), options.sample, samples, description});
      break;
    case FileFormat::Png:
      if (!v.is_2d()) fail(path, "PNG export supports 2D images only");
      if (!is_integer(options.sample)) fail(path, "PNG export needs an 8- or 16-bit sample format");
      write_png(path, v.dims(), options.sample, samples, description);
      break;
    case FileFormat::Raw: {
      if (is_integer(options.sample)) fail(path, "raw export is float32 only");
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) fail(path, "cannot open for writing");
      for (double s : samples) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(s));
        const char b[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                           static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
        out.write(b, 4);
      }
      std::ofstream side(raw_sidecar(path), std::ios::trunc);
      side << v.dims().nx << ' ' << v.dims().ny << ' ' << v.dims().nz << '\n';
      if (!out || !side) fail(path, "write failed");
      break;
    }
  }
}

}  // namespace destripe
