#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ctsum/feature_matrix.hpp"
#include "ctsum/shots.hpp"

namespace ctsum {

/// Per-video annotator data. At least one of the two lists is non-empty and
/// every vector has the video's frame count.
struct ReferenceSet {
  std::vector<std::vector<double>> scores;     // one importance vector per annotator
  std::vector<std::vector<int>> summaries;     // one 0/1 mask per reference summary

  bool empty() const { return scores.empty() && summaries.empty(); }
  /// Throws DataError on length or value violations.
  void validate(std::size_t frames) const;
};

enum class VideoGroup { kEval, kTrainOnly };
enum class Setting { kCanonical, kAugmented, kTransfer };
enum class F1Aggregation { kMean, kMax };

std::string_view to_string(VideoGroup g);
std::string_view to_string(Setting s);
std::string_view to_string(F1Aggregation a);
Setting parse_setting(std::string_view s);
F1Aggregation parse_aggregation(std::string_view s);
VideoGroup parse_group(std::string_view s);

struct VideoEntry {
  std::string id;
  std::filesystem::path feature_path;  // relative paths resolve against the manifest directory
  std::optional<std::vector<Shot>> shots;
  std::optional<std::filesystem::path> references_path;
  VideoGroup group = VideoGroup::kEval;
};

/// On-disk dataset description. Each split lists the test ids of one fold;
/// the fold's training set is derived from the setting.
struct DatasetManifest {
  std::vector<VideoEntry> videos;
  std::vector<std::vector<std::string>> splits;
  Setting setting = Setting::kCanonical;
  F1Aggregation aggregation = F1Aggregation::kMean;
  std::filesystem::path base_dir;

  /// Unique ids, known split ids, splits drawn from eval videos only, no
  /// duplicates within a split. Throws ManifestError.
  void validate() const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);

ReferenceSet load_references(const std::filesystem::path& path);
void save_references(const std::filesystem::path& path, const ReferenceSet& refs);

struct VideoRecord {
  std::string id;
  FeatureMatrix features;
  std::optional<ShotSegmentation> shots;
  std::optional<ReferenceSet> references;
  VideoGroup group = VideoGroup::kEval;
};

struct Dataset {
  std::vector<VideoRecord> videos;
  std::vector<std::vector<std::string>> splits;
  Setting setting = Setting::kCanonical;
  F1Aggregation aggregation = F1Aggregation::kMean;

  const VideoRecord& find(std::string_view id) const;
};

/// Loads every feature and reference file named by the manifest. Features are
/// L2-normalized on load when the file is not already flagged normalized.
Dataset load_dataset(const DatasetManifest& manifest);
Dataset load_dataset(const std::filesystem::path& manifest_path);

}  // namespace ctsum
