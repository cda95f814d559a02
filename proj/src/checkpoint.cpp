#include "ctsum/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "ctsum/error.hpp"

namespace ctsum {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'C', 'T', 'C', 'K'};
constexpr const char* kTensorNames[] = {
    "projector.input.weight",  "projector.input.bias",  "projector.hidden.weight",
    "projector.hidden.bias",   "projector.output.weight", "projector.output.bias",
    "filter.hidden.weight",    "filter.hidden.bias",    "filter.output.weight",
    "filter.output.bias"};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (in.gcount() != 4) throw FormatError("truncated checkpoint");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

json config_to_json(const TrainConfig& c) {
  return {{"lambda1", c.lambda1},
          {"lambda2", c.lambda2},
          {"lambda3", c.lambda3},
          {"neighbor_ratio", c.neighbor_ratio},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"segment_length", c.segment_length},
          {"proj_dim", c.proj_dim},
          {"hidden_dim", c.hidden_dim},
          {"filter_hidden_dim", c.filter_hidden_dim},
          {"length_target", c.length_target},
          {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.lambda1 = j.at("lambda1").get<double>();
  c.lambda2 = j.at("lambda2").get<double>();
  c.lambda3 = j.at("lambda3").get<double>();
  c.neighbor_ratio = j.at("neighbor_ratio").get<double>();
  c.lr = j.at("lr").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.segment_length = j.at("segment_length").get<std::size_t>();
  c.proj_dim = j.at("proj_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.filter_hidden_dim = j.at("filter_hidden_dim").get<std::size_t>();
  c.length_target = j.at("length_target").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ck) {
  const auto& p = ck.model.projector;
  const auto& f = ck.model.filter;
  const auto tensors = parameter_tensors(p, f);
  json shapes = json::array();
  const std::size_t dims[][2] = {{p.input.out, p.input.in},   {p.input.out, 1},
                                 {p.hidden.out, p.hidden.in}, {p.hidden.out, 1},
                                 {p.output.out, p.output.in}, {p.output.out, 1},
                                 {f.hidden.out, f.hidden.in}, {f.hidden.out, 1},
                                 {f.output.out, f.output.in}, {f.output.out, 1}};
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    shapes.push_back({{"name", kTensorNames[i]}, {"shape", {dims[i][0], dims[i][1]}}});
  }
  const json header = {{"format", 1},
                       {"input_dim", p.input_dim()},
                       {"proj_dim", p.proj_dim()},
                       {"hidden_dim", p.hidden_dim()},
                       {"filter_hidden_dim", f.hidden_dim()},
                       {"seed", ck.config.seed},
                       {"config", config_to_json(ck.config)},
                       {"tensors", shapes}};
  const std::string text = header.dump();
  out.write(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& t : tensors) {
    for (float v : t) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad checkpoint magic");
  const std::uint32_t len = read_u32(in);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (static_cast<std::uint32_t>(in.gcount()) != len) throw FormatError("truncated checkpoint header");

  Checkpoint ck;
  try {
    const json header = json::parse(text);
    if (header.at("format").get<int>() != 1) throw FormatError("unsupported checkpoint format");
    const auto in_dim = header.at("input_dim").get<std::size_t>();
    const auto d = header.at("proj_dim").get<std::size_t>();
    const auto h = header.at("hidden_dim").get<std::size_t>();
    const auto hf = header.at("filter_hidden_dim").get<std::size_t>();
    ck.config = config_from_json(header.at("config"));
    ck.model.projector = {DenseLayer::zeros(in_dim, d), DenseLayer::zeros(d, h), DenseLayer::zeros(h, d)};
    ck.model.filter = {DenseLayer::zeros(d, hf), DenseLayer::zeros(hf, 1)};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint header: ") + e.what());
  }
  for (auto& t : parameter_tensors(ck.model.projector, ck.model.filter)) {
    for (float& v : t) v = std::bit_cast<float>(read_u32(in));
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, ck);
  if (!out) throw IoError("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  try {
    return read_checkpoint(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace ctsum
