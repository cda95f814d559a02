#pragma once

#include <filesystem>
#include <iosfwd>

#include "ctsum/feature_matrix.hpp"

namespace ctsum {

// VFEAT container, little-endian:
//   "VF01" | u32 frames | u32 dim | u8 normalized | 3 zero bytes | f32[frames*dim]
inline constexpr char kVfeatMagic[4] = {'V', 'F', '0', '1'};
inline constexpr std::size_t kVfeatHeaderSize = 16;

void write_features(std::ostream& out, const FeatureMatrix& m);
FeatureMatrix read_features(std::istream& in);

void save_features(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace ctsum
