#include "ctsum/vfeat.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "ctsum/error.hpp"

namespace ctsum {

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_features(std::ostream& out, const FeatureMatrix& m) {
  if (m.frames() > std::numeric_limits<std::uint32_t>::max() ||
      m.dim() > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("feature matrix too large for VFEAT");
  }
  out.write(kVfeatMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(m.frames()));
  put_u32(out, static_cast<std::uint32_t>(m.dim()));
  const char flag_and_pad[4] = {static_cast<char>(m.normalized() ? 1 : 0), 0, 0, 0};
  out.write(flag_and_pad, 4);
  for (float v : m.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

FeatureMatrix read_features(std::istream& in) {
  std::array<unsigned char, kVfeatHeaderSize> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (in.gcount() != static_cast<std::streamsize>(header.size())) {
    throw FormatError("truncated VFEAT header");
  }
  if (std::memcmp(header.data(), kVfeatMagic, 4) != 0) {
    throw FormatError("bad VFEAT magic");
  }
  const std::uint32_t frames = get_u32(header.data() + 4);
  const std::uint32_t dim = get_u32(header.data() + 8);
  const unsigned char flag = header[12];
  if (frames == 0 || dim == 0) throw FormatError("VFEAT header declares an empty matrix");
  if (flag > 1) throw FormatError("VFEAT normalized flag must be 0 or 1");
  if (header[13] != 0 || header[14] != 0 || header[15] != 0) {
    throw FormatError("VFEAT reserved bytes must be zero");
  }

  const std::size_t count = static_cast<std::size_t>(frames) * dim;
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw FormatError("truncated VFEAT payload");
  }
  std::vector<float> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i] = std::bit_cast<float>(get_u32(raw.data() + 4 * i));
    if (std::isnan(data[i])) {
      throw DataError("NaN in VFEAT payload at frame " + std::to_string(i / dim));
    }
  }
  return FeatureMatrix(frames, dim, std::move(data), flag == 1);
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_features(out, m);
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file " + path.string());
  try {
    return read_features(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace ctsum
