#pragma once

#include <ostream>
#include <string>

#include "medres/entitygraph/dataset.h"

namespace medres::ingest {

// Graph manifest (JSON):
//   {"entity_types": [{"name": "user", "size": 200, "features": "user.tsv"}, ...],
//    "graphs": [{"name": "g", "source_type": "user", "target_type": "item",
//                "path": "g.tsv"}, ...],
//    "schema": {"user_types": ["user"], "item_types": ["item"],
//               "user_dim": 4, "item_dim": 4}}
// Relative paths resolve against the manifest's directory. "features" is
// optional (one whitespace-separated row per instance) and so is "schema".
struct GraphBundle {
  GraphSet graphs;
  DatasetSchema schema;
  bool has_schema = false;
};

// Throws ConfigError for a missing file and DataError (with file and line)
// for malformed content.
GraphBundle load_manifest(const std::string& path);

// Writes <dir>/<manifest_name>, one "<graph>.tsv" per graph and one
// "<type>.features.tsv" per type with features.
void write_manifest(const std::string& dir, const GraphSet& graphs,
                    const DatasetSchema& schema,
                    const std::string& manifest_name = "graphs.json");

// Edge list: "src<TAB>dst<TAB>weight" per line; blank lines and lines
// starting with '#' are skipped.
SparseMatrix load_edge_tsv(const std::string& path, std::size_t rows, std::size_t cols);
void write_edge_tsv(const SparseMatrix& adjacency, std::ostream& out);

// One JSON object per line:
//   {"user": {"user": 3}, "item": {"item": 7}, "user_vec": [...],
//    "item_vec": [...], "label": 1, "user_key": "3", "item_ref": "7"}
// Entity objects name every schema type of their side. The vectors,
// "user_key" and "item_ref" are optional.
Dataset load_dataset_jsonl(const std::string& path, const EntityCatalog& catalog,
                           const DatasetSchema& schema);
void write_dataset_jsonl(const Dataset& data, const EntityCatalog& catalog,
                         std::ostream& out);
void write_dataset_jsonl(const Dataset& data, const EntityCatalog& catalog,
                         const std::string& path);

}  // namespace medres::ingest
