#include "medres/model/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "medres/errors.h"

namespace medres {

namespace {

constexpr char kMagic[8] = {'M', 'E', 'D', 'R', 'E', 'S', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& in, const std::string& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw DataError(path, 0, "truncated checkpoint");
  }
  return v;
}

}  // namespace

nlohmann::ordered_json config_to_json(const MedresConfig& c) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(c.mode);
  j["encoder"] = to_string(c.encoder);
  j["layers"] = c.layers;
  j["conv_width"] = c.conv_width;
  j["merge_width"] = c.merge_width;
  j["transforms"] = c.transforms;
  j["per_branch_weights"] = c.per_branch_weights;
  j["normalize"] = c.normalize;
  j["hidden1"] = c.hidden1;
  j["hidden2"] = c.hidden2;
  j["scorer_bias"] = c.scorer_bias;
  return j;
}

MedresConfig config_from_json(const nlohmann::json& j) {
  MedresConfig c;
  c.mode = parse_mode(j.at("mode").get<std::string>());
  c.encoder = parse_encoder(j.at("encoder").get<std::string>());
  c.layers = j.at("layers").get<std::size_t>();
  c.conv_width = j.at("conv_width").get<std::size_t>();
  c.merge_width = j.at("merge_width").get<std::size_t>();
  c.transforms = j.at("transforms").get<std::size_t>();
  c.per_branch_weights = j.at("per_branch_weights").get<bool>();
  c.normalize = j.at("normalize").get<bool>();
  c.hidden1 = j.at("hidden1").get<std::size_t>();
  c.hidden2 = j.at("hidden2").get<std::size_t>();
  c.scorer_bias = j.at("scorer_bias").get<bool>();
  return c;
}

nlohmann::ordered_json schema_to_json(const DatasetSchema& s) {
  nlohmann::ordered_json j;
  j["user_types"] = s.user_types;
  j["item_types"] = s.item_types;
  j["user_dim"] = s.user_dim;
  j["item_dim"] = s.item_dim;
  return j;
}

DatasetSchema schema_from_json(const nlohmann::json& j) {
  DatasetSchema s;
  s.user_types = j.at("user_types").get<std::vector<std::size_t>>();
  s.item_types = j.at("item_types").get<std::vector<std::size_t>>();
  s.user_dim = j.at("user_dim").get<std::size_t>();
  s.item_dim = j.at("item_dim").get<std::size_t>();
  return s;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::ordered_json header;
  header["config"] = config_to_json(ckpt.config);
  header["schema"] = schema_to_json(ckpt.schema);
  header["digest"] = ckpt.digest;
  header["metadata"] = ckpt.metadata;
  auto& params = header["parameters"] = nlohmann::ordered_json::array();
  for (const auto& [name, entry] : ckpt.params.entries()) {
    params.push_back({{"name", name},
                      {"rows", entry.value.rows()},
                      {"cols", entry.value.cols()},
                      {"decay", entry.decay}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path, 0, "cannot open checkpoint for writing");
  out.write(kMagic, sizeof kMagic);
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, entry] : ckpt.params.entries()) {
    const auto d = entry.value.data();
    out.write(reinterpret_cast<const char*>(d.data()),
              static_cast<std::streamsize>(d.size() * sizeof(double)));
  }
  if (!out) throw DataError(path, 0, "failed writing checkpoint");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path, 0, "cannot open checkpoint");
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError(path, 0, "not a checkpoint file");
  }
  const auto version = take<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw DataError(path, 0, "unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = take<std::uint64_t>(in, path);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw DataError(path, 0, "truncated checkpoint header");
  }
  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.config = config_from_json(header.at("config"));
    ckpt.schema = schema_from_json(header.at("schema"));
    ckpt.digest = header.at("digest").get<std::string>();
    ckpt.metadata = header.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& p : header.at("parameters")) {
      const auto rows = p.at("rows").get<std::size_t>();
      const auto cols = p.at("cols").get<std::size_t>();
      std::vector<double> d(rows * cols);
      if (!in.read(reinterpret_cast<char*>(d.data()),
                   static_cast<std::streamsize>(d.size() * sizeof(double)))) {
        throw DataError(path, 0, "truncated parameter data");
      }
      ckpt.params.add(p.at("name").get<std::string>(), Tensor(rows, cols, std::move(d)),
                      p.at("decay").get<bool>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path, 0, std::string("malformed checkpoint header: ") + e.what());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path, 0, "trailing bytes after parameter data");
  }
  return ckpt;
}

}  // namespace medres
