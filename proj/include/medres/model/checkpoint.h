#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "medres/model/medres_model.h"

namespace medres {

// Everything needed to rebuild a trained model against a graph set.
struct Checkpoint {
  MedresConfig config;
  DatasetSchema schema;
  // graph_set_digest() of the graphs the model was trained on.
  std::string digest;
  ParameterStore params;
  std::map<std::string, std::string> metadata;
};

nlohmann::ordered_json config_to_json(const MedresConfig& c);
MedresConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json schema_to_json(const DatasetSchema& s);
DatasetSchema schema_from_json(const nlohmann::json& j);

// Binary container: magic "MEDRESCK", u32 version, u64 header length, a
// JSON header (config, schema, digest, metadata, parameter names, shapes
// and decay flags), then each parameter's doubles in header order. Values
// round-trip bit-exactly.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
// Throws DataError on an unreadable or malformed file.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace medres
