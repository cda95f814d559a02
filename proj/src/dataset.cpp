#include "ctsum/dataset.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "ctsum/error.hpp"
#include "ctsum/vfeat.hpp"

namespace ctsum {

using nlohmann::json;

void ReferenceSet::validate(std::size_t frames) const {
  if (empty()) throw DataError("reference set has neither scores nor summaries");
  for (const auto& s : scores) {
    if (s.size() != frames) {
      throw DataError("reference score vector has length " + std::to_string(s.size()) +
                      ", expected " + std::to_string(frames));
    }
  }
  for (const auto& s : summaries) {
    if (s.size() != frames) {
      throw DataError("reference summary has length " + std::to_string(s.size()) +
                      ", expected " + std::to_string(frames));
    }
    for (int v : s) {
      if (v != 0 && v != 1) throw DataError("reference summary entries must be 0 or 1");
    }
  }
}

std::string_view to_string(VideoGroup g) {
  return g == VideoGroup::kEval ? "eval" : "train-only";
}

std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::kCanonical: return "canonical";
    case Setting::kAugmented: return "augmented";
    case Setting::kTransfer: return "transfer";
  }
  return "?";
}

std::string_view to_string(F1Aggregation a) {
  return a == F1Aggregation::kMean ? "mean" : "max";
}

Setting parse_setting(std::string_view s) {
  if (s == "canonical") return Setting::kCanonical;
  if (s == "augmented") return Setting::kAugmented;
  if (s == "transfer") return Setting::kTransfer;
  throw ManifestError("unknown setting '" + std::string(s) + "'");
}

F1Aggregation parse_aggregation(std::string_view s) {
  if (s == "mean") return F1Aggregation::kMean;
  if (s == "max") return F1Aggregation::kMax;
  throw ManifestError("unknown F1 aggregation '" + std::string(s) + "'");
}

VideoGroup parse_group(std::string_view s) {
  if (s == "eval") return VideoGroup::kEval;
  if (s == "train-only") return VideoGroup::kTrainOnly;
  throw ManifestError("unknown video group '" + std::string(s) + "'");
}

void DatasetManifest::validate() const {
  std::set<std::string> ids;
  std::set<std::string> eval_ids;
  for (const auto& v : videos) {
    if (v.id.empty()) throw ManifestError("video with empty id");
    if (!ids.insert(v.id).second) throw ManifestError("duplicate video id '" + v.id + "'");
    if (v.group == VideoGroup::kEval) eval_ids.insert(v.id);
  }
  for (std::size_t f = 0; f < splits.size(); ++f) {
    std::set<std::string> seen;
    for (const auto& id : splits[f]) {
      if (!ids.count(id)) {
        throw ManifestError("split " + std::to_string(f) + " names unknown video '" + id + "'");
      }
      if (!eval_ids.count(id)) {
        throw ManifestError("split " + std::to_string(f) + " tests train-only video '" + id +
                            "', which overlaps the training pool");
      }
      if (!seen.insert(id).second) {
        throw ManifestError("split " + std::to_string(f) + " lists '" + id + "' twice");
      }
    }
  }
}

namespace {

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

DatasetManifest read_manifest(const std::filesystem::path& path) {
  const json j = read_json(path);
  DatasetManifest m;
  m.base_dir = path.parent_path();
  try {
    m.setting = parse_setting(j.value("setting", std::string("canonical")));
    m.aggregation = parse_aggregation(j.value("f1_aggregation", std::string("mean")));
    for (const auto& v : j.at("videos")) {
      VideoEntry e;
      e.id = v.at("id").get<std::string>();
      e.feature_path = v.at("feature_path").get<std::string>();
      if (v.contains("shots")) {
        std::vector<Shot> shots;
        for (const auto& s : v.at("shots")) {
          if (s.size() != 2) throw ManifestError("shot of video '" + e.id + "' is not [start, end)");
          shots.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
        }
        e.shots = std::move(shots);
      }
      if (v.contains("references_path")) {
        e.references_path = v.at("references_path").get<std::string>();
      }
      if (v.contains("group")) e.group = parse_group(v.at("group").get<std::string>());
      m.videos.push_back(std::move(e));
    }
    if (j.contains("splits")) {
      m.splits = j.at("splits").get<std::vector<std::vector<std::string>>>();
    }
  } catch (const json::exception& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  json videos = json::array();
  for (const auto& v : m.videos) {
    json e = {{"id", v.id}, {"feature_path", v.feature_path.generic_string()}};
    if (v.shots) {
      json shots = json::array();
      for (const auto& s : *v.shots) shots.push_back({s.start, s.end});
      e["shots"] = std::move(shots);
    }
    if (v.references_path) e["references_path"] = v.references_path->generic_string();
    e["group"] = to_string(v.group);
    videos.push_back(std::move(e));
  }
  json j = {{"setting", to_string(m.setting)},
            {"f1_aggregation", to_string(m.aggregation)},
            {"videos", std::move(videos)},
            {"splits", m.splits}};
  write_json(path, j);
}

ReferenceSet load_references(const std::filesystem::path& path) {
  const json j = read_json(path);
  ReferenceSet r;
  try {
    if (j.contains("scores")) r.scores = j.at("scores").get<std::vector<std::vector<double>>>();
    if (j.contains("summaries")) {
      r.summaries = j.at("summaries").get<std::vector<std::vector<int>>>();
    }
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return r;
}

void save_references(const std::filesystem::path& path, const ReferenceSet& refs) {
  json j = json::object();
  if (!refs.scores.empty()) j["scores"] = refs.scores;
  if (!refs.summaries.empty()) j["summaries"] = refs.summaries;
  write_json(path, j);
}

const VideoRecord& Dataset::find(std::string_view id) const {
  for (const auto& v : videos) {
    if (v.id == id) return v;
  }
  throw ManifestError("no video with id '" + std::string(id) + "'");
}

Dataset load_dataset(const DatasetManifest& manifest) {
  manifest.validate();
  Dataset d;
  d.splits = manifest.splits;
  d.setting = manifest.setting;
  d.aggregation = manifest.aggregation;
  auto resolve = [&](const std::filesystem::path& p) {
    return p.is_absolute() ? p : manifest.base_dir / p;
  };
  for (const auto& e : manifest.videos) {
    VideoRecord v;
    v.id = e.id;
    v.group = e.group;
    FeatureMatrix raw = load_features(resolve(e.feature_path));
    v.features = raw.normalized() ? std::move(raw) : l2_normalize_rows(raw);
    const std::size_t frames = v.features.frames();
    if (e.shots) {
      try {
        v.shots = ShotSegmentation(*e.shots, frames);
      } catch (const ShapeError& err) {
        throw ManifestError("video '" + e.id + "': " + err.what());
      }
    }
    if (e.references_path) {
      const auto path = resolve(*e.references_path);
      ReferenceSet refs = load_references(path);
      try {
        refs.validate(frames);
      } catch (const DataError& err) {
        throw DataError(path.string() + ": " + err.what());
      }
      v.references = std::move(refs);
    }
    d.videos.push_back(std::move(v));
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  return load_dataset(read_manifest(manifest_path));
}

}  // namespace ctsum
