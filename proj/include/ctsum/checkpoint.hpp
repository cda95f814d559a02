#pragma once

#include <filesystem>
#include <iosfwd>

#include "ctsum/pipeline.hpp"
#include "ctsum/refine.hpp"

namespace ctsum {

// Checkpoint layout, little-endian:
//   "CTCK" | u32 header length | JSON header | f32 parameter blob
// The header records layer sizes, the training configuration and the
// tensor order of the blob.
struct Checkpoint {
  TrainedModel model;
  TrainConfig config;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ck);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ctsum
