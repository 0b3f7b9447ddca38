#include "medres/ingest/files.h"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "medres/errors.h"

namespace medres::ingest {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).string();
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return !s.empty() && ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Tensor load_features(const std::string& path, std::size_t rows) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open feature file " + path);
  std::vector<double> data;
  std::size_t cols = 0, n = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string f;
    std::size_t c = 0;
    while (fields >> f) {
      double v = 0.0;
      if (!parse_number(f, v)) throw DataError(path, line_no, "not a number: '" + f + "'");
      data.push_back(v);
      ++c;
    }
    if (c == 0) continue;
    if (n == 0) cols = c;
    if (c != cols) throw DataError(path, line_no, "ragged feature row");
    ++n;
  }
  if (n != rows) {
    throw DataError(path, line_no, "expected " + std::to_string(rows) +
                                       " feature rows, found " + std::to_string(n));
  }
  return Tensor(rows, cols, std::move(data));
}

std::vector<std::size_t> type_indices(const EntityCatalog& cat, const json& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) out.push_back(cat.index_of(n.get<std::string>()));
  return out;
}

}  // namespace

SparseMatrix load_edge_tsv(const std::string& path, std::size_t rows, std::size_t cols) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file " + path);
  std::vector<SparseEntry> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? tab : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    SparseEntry e;
    if (f.size() != 3 || !parse_number(f[0], e.row) || !parse_number(f[1], e.col) ||
        !parse_number(f[2], e.value)) {
      throw DataError(path, line_no, "expected src<TAB>dst<TAB>weight");
    }
    if (e.row >= rows || e.col >= cols) {
      throw DataError(path, line_no, "edge (" + f[0] + "," + f[1] + ") outside " +
                                         std::to_string(rows) + "x" + std::to_string(cols));
    }
    entries.push_back(e);
  }
  try {
    return SparseMatrix(rows, cols, std::move(entries));
  } catch (const std::exception& e) {
    throw DataError(path, 0, e.what());
  }
}

void write_edge_tsv(const SparseMatrix& a, std::ostream& out) {
  for (const auto& e : a.entries()) {
    out << e.row << '\t' << e.col << '\t' << format_double(e.value) << '\n';
  }
}

GraphBundle load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  json m;
  try {
    m = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  GraphBundle b;
  try {
    EntityCatalog cat;
    for (const auto& t : m.at("entity_types")) {
      const auto size = t.at("size").get<std::size_t>();
      std::optional<Tensor> features;
      if (t.contains("features")) {
        features = load_features(resolve(base, t["features"].get<std::string>()), size);
      }
      cat.add_type(t.at("name").get<std::string>(), size, std::move(features));
    }
    b.graphs = GraphSet(std::move(cat));
    const auto& c = b.graphs.catalog();
    for (const auto& g : m.at("graphs")) {
      const std::size_t src = c.index_of(g.at("source_type").get<std::string>());
      const std::size_t dst = c.index_of(g.at("target_type").get<std::string>());
      b.graphs.add_graph({g.at("name").get<std::string>(), src, dst,
                          load_edge_tsv(resolve(base, g.at("path").get<std::string>()),
                                        c.type(src).size, c.type(dst).size)});
    }
    if (m.contains("schema")) {
      const auto& s = m["schema"];
      b.schema.user_types = type_indices(c, s.at("user_types"));
      b.schema.item_types = type_indices(c, s.at("item_types"));
      b.schema.user_dim = s.value("user_dim", std::size_t{0});
      b.schema.item_dim = s.value("item_dim", std::size_t{0});
      b.has_schema = true;
    }
  } catch (const json::exception& e) {
    throw DataError(path, 0, std::string("bad manifest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(path, 0, std::string("bad manifest: ") + e.what());
  }
  return b;
}

void write_manifest(const std::string& dir, const GraphSet& graphs,
                    const DatasetSchema& schema, const std::string& manifest_name) {
  fs::create_directories(dir);
  const auto& cat = graphs.catalog();
  ordered_json m;
  m["entity_types"] = ordered_json::array();
  for (const auto& t : cat.types()) {
    ordered_json e{{"name", t.name}, {"size", t.size}};
    if (t.features) {
      const std::string file = t.name + ".features.tsv";
      std::ofstream out(fs::path(dir) / file);
      for (std::size_t r = 0; r < t.features->rows(); ++r) {
        for (std::size_t c = 0; c < t.features->cols(); ++c) {
          out << (c ? "\t" : "") << format_double((*t.features)(r, c));
        }
        out << '\n';
      }
      e["features"] = file;
    }
    m["entity_types"].push_back(e);
  }
  m["graphs"] = ordered_json::array();
  for (const auto& g : graphs.graphs()) {
    const std::string file = g.name + ".tsv";
    std::ofstream out(fs::path(dir) / file);
    write_edge_tsv(g.adjacency, out);
    m["graphs"].push_back({{"name", g.name},
                           {"source_type", cat.type(g.source_type).name},
                           {"target_type", cat.type(g.target_type).name},
                           {"path", file}});
  }
  auto names = [&](const std::vector<std::size_t>& ts) {
    std::vector<std::string> out;
    for (std::size_t t : ts) out.push_back(cat.type(t).name);
    return out;
  };
  m["schema"] = {{"user_types", names(schema.user_types)},
                 {"item_types", names(schema.item_types)},
                 {"user_dim", schema.user_dim},
                 {"item_dim", schema.item_dim}};
  std::ofstream out(fs::path(dir) / manifest_name);
  out << m.dump(2) << '\n';
  if (!out) throw DataError(dir, 0, "failed writing manifest");
}

Dataset load_dataset_jsonl(const std::string& path, const EntityCatalog& catalog,
                           const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset " + path);
  Dataset data(schema);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      LabeledExample ex;
      auto ids = [&](const json& obj, const std::vector<std::size_t>& types, const char* side) {
        if (!obj.is_object() || obj.size() != types.size()) {
          throw DataError(path, line_no, std::string(side) + " must name exactly " +
                                             std::to_string(types.size()) + " entity types");
        }
        std::vector<std::size_t> out;
        for (std::size_t t : types) {
          const auto& name = catalog.type(t).name;
          if (!obj.contains(name)) {
            throw DataError(path, line_no, std::string(side) + " lacks type " + name);
          }
          const auto id = obj[name].get<std::size_t>();
          if (id >= catalog.type(t).size) {
            throw DataError(path, line_no, name + " id " + std::to_string(id) +
                                               " outside [0," +
                                               std::to_string(catalog.type(t).size) + ")");
          }
          out.push_back(id);
        }
        return out;
      };
      ex.user_entities = ids(j.at("user"), schema.user_types, "user");
      ex.item_entities = ids(j.at("item"), schema.item_types, "item");
      if (j.contains("user_vec")) ex.user_vec = j["user_vec"].get<std::vector<double>>();
      if (j.contains("item_vec")) ex.item_vec = j["item_vec"].get<std::vector<double>>();
      ex.label = j.at("label").get<int>();
      if (j.contains("user_key")) ex.user_key = j["user_key"].get<std::string>();
      if (j.contains("item_ref")) ex.item_ref = j["item_ref"].get<std::string>();
      data.add(std::move(ex));
    } catch (const DataError& e) {
      if (!e.file().empty()) throw;
      throw DataError(path, line_no, e.what());
    } catch (const json::exception& e) {
      throw DataError(path, line_no, e.what());
    }
  }
  return data;
}

void write_dataset_jsonl(const Dataset& data, const EntityCatalog& catalog,
                         std::ostream& out) {
  const auto& s = data.schema();
  for (const auto& ex : data.examples()) {
    ordered_json j;
    ordered_json user = ordered_json::object(), item = ordered_json::object();
    for (std::size_t i = 0; i < s.user_types.size(); ++i) {
      user[catalog.type(s.user_types[i]).name] = ex.user_entities[i];
    }
    for (std::size_t i = 0; i < s.item_types.size(); ++i) {
      item[catalog.type(s.item_types[i]).name] = ex.item_entities[i];
    }
    j["user"] = user;
    j["item"] = item;
    j["user_vec"] = ex.user_vec;
    j["item_vec"] = ex.item_vec;
    j["label"] = ex.label;
    j["user_key"] = ex.user_key;
    j["item_ref"] = ex.item_ref;
    out << j.dump() << '\n';
  }
}

void write_dataset_jsonl(const Dataset& data, const EntityCatalog& catalog,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path, 0, "cannot open for writing");
  write_dataset_jsonl(data, catalog, out);
}

}  // namespace medres::ingest
