#include "destripe/tiff.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace destripe::tiff {
namespace {

enum Tag : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kPhotometric = 262,
  kImageDescription = 270,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kPlanarConfig = 284,
  kSampleFormat = 339,
};

enum Type : std::uint16_t { kByte = 1, kAscii = 2, kShort = 3, kLong = 4 };

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& why) {
  throw Error(path.string() + ": " + why);
}

class Reader {
 public:
  Reader(std::vector<unsigned char> bytes, std::filesystem::path path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  void set_big_endian(bool be) { big_ = be; }
  [[nodiscard]] std::size_t size() const { return bytes_.size(); }

  std::uint64_t uint(std::size_t off, std::size_t width) const {
    if (off + width > bytes_.size()) fail(path_, "truncated file");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) {
      const std::uint64_t b = bytes_[off + i];
      v |= big_ ? b << (8 * (width - 1 - i)) : b << (8 * i);
    }
    return v;
  }
  std::uint16_t u16(std::size_t off) const { return static_cast<std::uint16_t>(uint(off, 2)); }
  std::uint32_t u32(std::size_t off) const { return static_cast<std::uint32_t>(uint(off, 4)); }
  const unsigned char* at(std::size_t off, std::size_t len) const {
    if (off + len > bytes_.size() || off + len < off) fail(path_, "truncated file");
    return bytes_.data() + off;
  }

 private:
  std::vector<unsigned char> bytes_;
  std::filesystem::path path_;
  bool big_ = false;
};

struct Entry {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::size_t value_offset = 0;  // where the value (or values) live
};

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case kByte:
    case kAscii: return 1;
    case kShort: return 2;
    case kLong: return 4;
    default: return 0;
  }
}

std::vector<std::uint32_t> read_values(const Reader& r, const Entry& e, const std::filesystem::path& path) {
  const std::size_t ts = type_size(e.type);
  if (ts != 2 && ts != 4) fail(path, "unexpected TIFF field type");
  std::vector<std::uint32_t> out(e.count);
  for (std::uint32_t i = 0; i < e.count; ++i) {
    out[i] = ts == 2 ? r.u16(e.value_offset + i * 2) : r.u32(e.value_offset + i * 4);
  }
  return out;
}

}  // namespace

Stack read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open file");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path);
  if (r.size() < 8) fail(path, "truncated TIFF header");
  const unsigned char* hdr = r.at(0, 4);
  if (hdr[0] == 'I' && hdr[1] == 'I') {
    r.set_big_endian(false);
  } else if (hdr[0] == 'M' && hdr[1] == 'M') {
    r.set_big_endian(true);
  } else {
    fail(path, "not a TIFF file");
  }
  if (r.u16(2) != 42) fail(path, "not a classic TIFF file (BigTIFF is unsupported)");

  Stack stack;
  std::size_t ifd = r.u32(4);
  std::size_t pages = 0;
  while (ifd != 0) {
    if (++pages > 100000) fail(path, "IFD chain does not terminate");
    const std::uint16_t n = r.u16(ifd);
    std::map<std::uint16_t, Entry> tags;
    for (std::uint16_t i = 0; i < n; ++i) {
      const std::size_t off = ifd + 2 + 12 * static_cast<std::size_t>(i);
      Entry e;
      const std::uint16_t tag = r.u16(off);
      e.type = r.u16(off + 2);
      e.count = r.u32(off + 4);
      const std::size_t bytes_needed = type_size(e.type) * e.count;
      e.value_offset = bytes_needed <= 4 ? off + 8 : r.u32(off + 8);
      tags[tag] = e;
    }
    const std::size_t next = r.u32(ifd + 2 + 12 * static_cast<std::size_t>(n));

    auto scalar = [&](std::uint16_t tag, std::uint32_t fallback) -> std::uint32_t {
      const auto it = tags.find(tag);
      if (it == tags.end()) return fallback;
      return read_values(r, it->second, path).front();
    };
    const std::uint32_t width = scalar(kImageWidth, 0);
    const std::uint32_t height = scalar(kImageLength, 0);
    if (width == 0 || height == 0) fail(path, "missing image dimensions");
    const std::uint32_t spp = scalar(kSamplesPerPixel, 1);
    const std::uint32_t photometric = scalar(kPhotometric, 1);
    if (spp != 1 || photometric == 2) fail(path, "RGB / multi-channel images are not supported (grayscale only)");
    if (photometric != 1 && photometric != 0) fail(path, "unsupported photometric interpretation");
    if (scalar(kCompression, 1) != 1) fail(path, "compressed TIFF is not supported");
    const std::uint32_t bps = scalar(kBitsPerSample, 1);
    const std::uint32_t sample_format = scalar(kSampleFormat, 1);

    SampleFormat fmt{};
    if (bps == 8 && sample_format == 1) {
      fmt = SampleFormat::UInt8;
    } else if (bps == 16 && sample_format == 1) {
      fmt = SampleFormat::UInt16;
    } else if (bps == 32 && sample_format == 3) {
      fmt = SampleFormat::Float32;
    } else {
      fail(path, "unsupported sample format (" + std::to_string(bps) + "-bit, format " +
                     std::to_string(sample_format) + ")");
    }

    if (pages == 1) {
      stack.dims = Dims{width, height, 0};
      stack.format = fmt;
      if (const auto it = tags.find(kImageDescription); it != tags.end() && it->second.type == kAscii) {
        const auto* p = r.at(it->second.value_offset, it->second.count);
        stack.description.assign(reinterpret_cast<const char*>(p), strnlen(reinterpret_cast<const char*>(p), it->second.count));
      }
    } else if (width != stack.dims.nx || height != stack.dims.ny || fmt != stack.format) {
      fail(path, "pages differ in size or sample format");
    }

    const auto so = tags.find(kStripOffsets);
    const auto sc = tags.find(kStripByteCounts);
    if (so == tags.end() || sc == tags.end()) fail(path, "missing strip layout (tiled TIFF is unsupported)");
    const auto offsets = read_values(r, so->second, path);
    const auto counts = read_values(r, sc->second, path);
    if (offsets.size() != counts.size()) fail(path, "inconsistent strip tables");

    const std::size_t bytes_per = bps / 8;
    const std::size_t expected = static_cast<std::size_t>(width) * height * bytes_per;
    std::vector<unsigned char> raw;
    raw.reserve(expected);
    for (std::size_t s = 0; s < offsets.size(); ++s) {
      const auto* p = r.at(offsets[s], counts[s]);
      raw.insert(raw.end(), p, p + counts[s]);
    }
    if (raw.size() < expected) fail(path, "truncated image data");

    Reader pix(std::move(raw), path);
    pix.set_big_endian(hdr[0] == 'M');
    const std::size_t count = static_cast<std::size_t>(width) * height;
    for (std::size_t i = 0; i < count; ++i) {
      double v = 0.0;
      switch (fmt) {
        case SampleFormat::UInt8: v = static_cast<double>(pix.uint(i, 1)); break;
        case SampleFormat::UInt16: v = static_cast<double>(pix.u16(2 * i)); break;
        case SampleFormat::Float32: v = static_cast<double>(std::bit_cast<float>(pix.u32(4 * i))); break;
      }
      if (photometric == 0 && fmt != SampleFormat::Float32) v = full_scale(fmt) - v;
      stack.samples.push_back(v);
    }
    ifd = next;
  }
  if (pages == 0) fail(path, "TIFF contains no images");
  stack.dims.nz = pages;
  return stack;
}

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v & 0xff));
    u8(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v & 0xffff));
    u16(static_cast<std::uint16_t>(v >> 16));
  }
  void patch32(std::size_t off, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf[off + static_cast<std::size_t>(i)] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  }
  void align2() {
    if (buf.size() % 2) u8(0);
  }
  std::vector<unsigned char> buf;
};

}  // namespace

void write(const std::filesystem::path& path, const Stack& stack) {
  const Dims d = stack.dims;
  if (!d.valid() || stack.samples.size() != d.size()) throw Error(path.string() + ": sample count does not match dims");
  const std::uint16_t bps = stack.format == SampleFormat::UInt8 ? 8 : stack.format == SampleFormat::UInt16 ? 16 : 32;
  const std::uint16_t sfmt = stack.format == SampleFormat::Float32 ? 3 : 1;

  Writer w;
  w.u8('I');
  w.u8('I');
  w.u16(42);
  std::size_t link = w.buf.size();  // offset field pointing at the next IFD
  w.u32(0);

  std::size_t desc_offset = 0;
  const std::uint32_t desc_len = static_cast<std::uint32_t>(stack.description.size() + 1);
  if (!stack.description.empty()) {
    desc_offset = w.buf.size();
    for (char c : stack.description) w.u8(static_cast<std::uint8_t>(c));
    w.u8(0);
    w.align2();
  }

  const std::size_t plane = d.slice_size();
  for (std::size_t z = 0; z < d.nz; ++z) {
    const std::size_t data_offset = w.buf.size();
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = stack.samples[z * plane + i];
      switch (stack.format) {
        case SampleFormat::UInt8: w.u8(static_cast<std::uint8_t>(v)); break;
        case SampleFormat::UInt16: w.u16(static_cast<std::uint16_t>(v)); break;
        case SampleFormat::Float32: w.u32(std::bit_cast<std::uint32_t>(static_cast<float>(v))); break;
      }
    }
    w.align2();

    const bool with_desc = z == 0 && !stack.description.empty();
    const std::uint16_t entries = with_desc ? 12 : 11;
    const std::size_t ifd = w.buf.size();
    w.patch32(link, static_cast<std::uint32_t>(ifd));
    w.u16(entries);
    auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t count, std::uint32_t value) {
      w.u16(tag);
      w.u16(type);
      w.u32(count);
      if (type == kShort && count == 1) {
        w.u16(static_cast<std::uint16_t>(value));
        w.u16(0);
      } else {
        w.u32(value);
      }
    };
    entry(kImageWidth, kLong, 1, static_cast<std::uint32_t>(d.nx));
    entry(kImageLength, kLong, 1, static_cast<std::uint32_t>(d.ny));
    entry(kBitsPerSample, kShort, 1, bps);
    entry(kCompression, kShort, 1, 1);
    entry(kPhotometric, kShort, 1, 1);
    if (with_desc) entry(kImageDescription, kAscii, desc_len, static_cast<std::uint32_t>(desc_offset));
    entry(kStripOffsets, kLong, 1, static_cast<std::uint32_t>(data_offset));
    entry(kSamplesPerPixel, kShort, 1, 1);
    entry(kRowsPerStrip, kLong, 1, static_cast<std::uint32_t>(d.ny));
    entry(kStripByteCounts, kLong, 1, static_cast<std::uint32_t>(plane * bps / 8));
    entry(kPlanarConfig, kShort, 1, 1);
    entry(kSampleFormat, kShort, 1, sfmt);
    link = w.buf.size();
    w.u32(0);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(w.buf.data()), static_cast<std::streamsize>(w.buf.size()));
  if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace destripe::tiff
