#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "ctsum/checkpoint.hpp"
#include "ctsum/dataset.hpp"
#include "ctsum/error.hpp"
#include "ctsum/feature_matrix.hpp"
#include "ctsum/shots.hpp"
#include "ctsum/vfeat.hpp"
#include "oracles.hpp"

using namespace ctsum;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ctsum_test_featureio" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string bytes_of(const FeatureMatrix& m) {
  std::ostringstream out(std::ios::binary);
  write_features(out, m);
  return out.str();
}

FeatureMatrix parse(const std::string& bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_features(in);
}

}  // namespace

TEST_CASE("feature matrix rejects empty shapes and non-finite entries") {
  CHECK_THROWS_AS(FeatureMatrix(0, 3, {}), FormatError);
  CHECK_THROWS_AS(FeatureMatrix(2, 2, {1, 2, 3}), FormatError);
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1, std::numeric_limits<float>::quiet_NaN()}), DataError);
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1, std::numeric_limits<float>::infinity()}), DataError);
  CHECK_THROWS_AS(FeatureMatrix(1, 2, {1, 1}, true), DataError);
  CHECK_NOTHROW(FeatureMatrix(1, 2, {0.6f, 0.8f}, true));
}

TEST_CASE("l2 normalization gives unit rows and keeps direction") {
  const FeatureMatrix m(2, 3, {3, 0, 4, 0, -2, 0});
  const FeatureMatrix n = l2_normalize_rows(m);
  CHECK(n.normalized());
  CHECK(n.at(0, 0) == doctest::Approx(0.6));
  CHECK(n.at(0, 2) == doctest::Approx(0.8));
  CHECK(n.at(1, 1) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(l2_normalize_rows(FeatureMatrix(2, 2, {1, 0, 0, 0})), DegenerateFeatureError);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<float> u(-3.0f, 3.0f);
  std::vector<float> data(50 * 7);
  for (float& x : data) x = u(rng);
  const FeatureMatrix r = l2_normalize_rows(FeatureMatrix(50, 7, data));
  for (std::size_t t = 0; t < r.frames(); ++t) {
    double n2 = 0.0;
    for (float x : r.row(t)) n2 += static_cast<double>(x) * x;
    CHECK(std::abs(std::sqrt(n2) - 1.0) < kUnitNormTolerance);
  }
}

TEST_CASE("VFEAT byte layout") {
  const FeatureMatrix m(2, 1, {1.0f, -2.5f});
  const std::string b = bytes_of(m);
  REQUIRE(b.size() == kVfeatHeaderSize + 8);
  CHECK(b.substr(0, 4) == "VF01");
  const unsigned char expected_header[] = {'V', 'F', '0', '1', 2, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0};
  CHECK(std::memcmp(b.data(), expected_header, 16) == 0);
  // 1.0f = 0x3F800000, -2.5f = 0xC0200000, little-endian
  const unsigned char payload[] = {0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x20, 0xC0};
  CHECK(std::memcmp(b.data() + 16, payload, 8) == 0);
}

TEST_CASE("VFEAT round trip is bit exact") {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const auto frames = 1 + rng() % 40;
    const auto dim = 1 + rng() % 16;
    const FeatureMatrix m = oracle::random_unit_rows(frames, dim, rng);
    const FeatureMatrix back = parse(bytes_of(m));
    CHECK(back == m);
    CHECK(bytes_of(back) == bytes_of(m));
  }
  std::vector<float> odd = {-0.0f, 1e-38f, 3.4e38f, -7.25f};
  const FeatureMatrix m(2, 2, odd);
  const FeatureMatrix back = parse(bytes_of(m));
  for (std::size_t i = 0; i < odd.size(); ++i) {
    CHECK(std::bit_cast<std::uint32_t>(back.data()[i]) == std::bit_cast<std::uint32_t>(odd[i]));
  }
}

TEST_CASE("VFEAT rejects malformed input") {
  const std::string good = bytes_of(FeatureMatrix(2, 2, {1, 0, 0, 1}, true));
  std::string bad = good;
  bad[0] = 'X';
  CHECK_THROWS_AS(parse(bad), FormatError);
  CHECK_THROWS_AS(parse(good.substr(0, 10)), FormatError);
  CHECK_THROWS_AS(parse(good.substr(0, good.size() - 1)), FormatError);
  bad = good;
  bad[12] = 2;
  CHECK_THROWS_AS(parse(bad), FormatError);
  bad = good;
  bad[13] = 1;
  CHECK_THROWS_AS(parse(bad), FormatError);
  bad = good;
  bad[4] = 0;
  CHECK_THROWS_AS(parse(bad), FormatError);
  bad = good;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(bad.data() + 16, &nan, 4);
  CHECK_THROWS_AS(parse(bad), DataError);
  // normalized flag set on rows that are not unit norm
  bad = bytes_of(FeatureMatrix(1, 2, {2, 0}));
  bad[12] = 1;
  CHECK_THROWS_AS(parse(bad), DataError);
}

TEST_CASE("missing feature file names the path") {
  const fs::path p = scratch("missing") / "nothing_here.vfeat";
  try {
    load_features(p);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("nothing_here.vfeat") != std::string::npos);
  }
}

TEST_CASE("length normalization indices") {
  CHECK(length_normalization_indices(5, 5, 1) == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(length_normalization_indices(3, 5, 1) == std::vector<std::size_t>{0, 1, 1, 2, 2});
  CHECK(length_normalization_indices(7, 1, 1) == std::vector<std::size_t>{0});
  const auto down = length_normalization_indices(500, 200, 17);
  CHECK(down.size() == 200);
  CHECK(std::is_sorted(down.begin(), down.end()));
  CHECK(std::adjacent_find(down.begin(), down.end()) == down.end());
  CHECK(down.back() < 500);
  CHECK(down == length_normalization_indices(500, 200, 17));
  CHECK(down != length_normalization_indices(500, 200, 18));

  std::mt19937_64 rng(3);
  const FeatureMatrix m = oracle::random_unit_rows(50, 4, rng);
  const FeatureMatrix up = normalize_length(m, 120, 0);
  CHECK(up.frames() == 120);
  CHECK(up.normalized());
  CHECK_THROWS_AS(normalize_length(m, 0, 0), ShapeError);
}

TEST_CASE("shot segmentation must tile the video") {
  CHECK_NOTHROW(ShotSegmentation({{0, 3}, {3, 5}}, 5));
  CHECK_THROWS_AS(ShotSegmentation({{0, 3}, {4, 5}}, 5), ShapeError);
  CHECK_THROWS_AS(ShotSegmentation({{0, 3}, {3, 3}, {3, 5}}, 5), ShapeError);
  CHECK_THROWS_AS(ShotSegmentation({{0, 3}}, 5), ShapeError);
  const auto d = default_shots(65, 30);
  REQUIRE(d.size() == 3);
  CHECK(d[2].start == 60);
  CHECK(d[2].end == 65);
}

TEST_CASE("manifest and references round trip through load_dataset") {
  const fs::path dir = scratch("dataset");
  std::mt19937_64 rng(5);
  const FeatureMatrix a = oracle::random_unit_rows(6, 3, rng);
  const FeatureMatrix b(4, 2, {3, 4, 1, 0, 0, 2, 1, 1});  // not normalized on disk
  fs::create_directories(dir / "feat");
  save_features(dir / "feat" / "a.vfeat", a);
  save_features(dir / "feat" / "b.vfeat", b);
  save_references(dir / "a.json", ReferenceSet{{{0, 1, 0.5, 0.5, 1, 0}}, {{0, 1, 1, 0, 0, 0}}});

  DatasetManifest m;
  m.aggregation = F1Aggregation::kMax;
  m.setting = Setting::kAugmented;
  m.videos.push_back({"a", "feat/a.vfeat", std::vector<Shot>{{0, 2}, {2, 6}}, fs::path("a.json"),
                      VideoGroup::kEval});
  m.videos.push_back({"b", "feat/b.vfeat", std::nullopt, std::nullopt, VideoGroup::kTrainOnly});
  m.splits = {{"a"}};
  write_manifest(dir / "manifest.json", m);

  const DatasetManifest back = read_manifest(dir / "manifest.json");
  CHECK(back.videos.size() == 2);
  CHECK(back.aggregation == F1Aggregation::kMax);
  CHECK(back.setting == Setting::kAugmented);

  const Dataset d = load_dataset(dir / "manifest.json");
  REQUIRE(d.videos.size() == 2);
  CHECK(d.find("a").features == a);
  CHECK(d.find("a").shots->size() == 2);
  CHECK(d.find("a").references->scores.size() == 1);
  CHECK(d.find("b").features.normalized());
  CHECK(d.find("b").features.at(0, 0) == doctest::Approx(0.6));
  CHECK(d.find("b").group == VideoGroup::kTrainOnly);
  CHECK_THROWS_AS(d.find("zzz"), ManifestError);
}

TEST_CASE("manifest validation") {
  DatasetManifest m;
  m.videos.push_back({"a", "a.vfeat", std::nullopt, std::nullopt, VideoGroup::kEval});
  m.videos.push_back({"a", "b.vfeat", std::nullopt, std::nullopt, VideoGroup::kEval});
  CHECK_THROWS_AS(m.validate(), ManifestError);
  m.videos[1].id = "b";
  m.splits = {{"c"}};
  CHECK_THROWS_AS(m.validate(), ManifestError);
  m.splits = {{"a", "a"}};
  CHECK_THROWS_AS(m.validate(), ManifestError);
  m.videos[1].group = VideoGroup::kTrainOnly;
  m.splits = {{"b"}};
  CHECK_THROWS_AS(m.validate(), ManifestError);
  m.splits = {{"a"}};
  CHECK_NOTHROW(m.validate());

  const fs::path dir = scratch("badshots");
  std::mt19937_64 rng(1);
  save_features(dir / "a.vfeat", oracle::random_unit_rows(5, 2, rng));
  DatasetManifest s;
  s.videos.push_back({"a", "a.vfeat", std::vector<Shot>{{0, 4}}, std::nullopt, VideoGroup::kEval});
  write_manifest(dir / "m.json", s);
  CHECK_THROWS_AS(load_dataset(dir / "m.json"), ManifestError);

  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(read_manifest(dir / "broken.json"), FormatError);
}

TEST_CASE("references validate against the frame count") {
  CHECK_THROWS_AS(ReferenceSet{}.validate(3), DataError);
  CHECK_THROWS_AS((ReferenceSet{{{0.1, 0.2}}, {}}).validate(3), DataError);
  CHECK_THROWS_AS((ReferenceSet{{}, {{0, 2, 1}}}).validate(3), DataError);
  CHECK_NOTHROW((ReferenceSet{{}, {{0, 1, 1}}}).validate(3));
}

TEST_CASE("checkpoint round trip") {
  TrainConfig c;
  c.proj_dim = 6;
  c.hidden_dim = 10;
  c.filter_hidden_dim = 5;
  c.seed = 77;
  c.lr = 3e-3;
  const Checkpoint ck{{ProjectorParams::init(4, 6, 10, 1), FilterParams::init(6, 5, 2)}, c};
  std::ostringstream out(std::ios::binary);
  write_checkpoint(out, ck);
  std::istringstream in(out.str(), std::ios::binary);
  const Checkpoint back = read_checkpoint(in);
  CHECK(back.model.projector == ck.model.projector);
  CHECK(back.model.filter == ck.model.filter);
  CHECK(back.config.seed == 77);
  CHECK(back.config.lr == 3e-3);
  CHECK(back.config.hidden_dim == 10);

  std::string bad = out.str();
  bad[0] = 'Z';
  std::istringstream bad_in(bad, std::ios::binary);
  CHECK_THROWS_AS(read_checkpoint(bad_in), FormatError);
  std::istringstream short_in(out.str().substr(0, out.str().size() - 3), std::ios::binary);
  CHECK_THROWS_AS(read_checkpoint(short_in), FormatError);
}
