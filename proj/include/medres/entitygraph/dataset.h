#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "medres/entitygraph/graph_set.h"

namespace medres {

// Which entity types make up a user and an item, and the widths of their
// dynamic vectors. Type indices refer to the GraphSet's catalog; a type may
// appear at most once per side.
struct DatasetSchema {
  std::vector<std::size_t> user_types;
  std::vector<std::size_t> item_types;
  std::size_t user_dim = 0;
  std::size_t item_dim = 0;

  friend bool operator==(const DatasetSchema&, const DatasetSchema&) = default;
};

// One labelled (user, item) pair. Entity ids are aligned with the schema's
// type lists. A missing dynamic component is the zero vector.
struct LabeledExample {
  std::vector<std::size_t> user_entities;
  std::vector<std::size_t> item_entities;
  std::vector<double> user_vec;
  std::vector<double> item_vec;
  int label = 0;
  std::string user_key;
  // Free-form item label carried through to score output; defaults to the
  // item entity ids joined like a user key.
  std::string item_ref;
};

// "3" for a single user entity, "3|7" for several.
std::string default_user_key(const std::vector<std::size_t>& user_entities);

struct UserGroup {
  std::string key;
  std::vector<std::size_t> rows;
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(DatasetSchema schema) : schema_(std::move(schema)) {}

  // Checks entity counts, vector widths (empty vectors are zero-filled),
  // the label, and fills empty user keys and item refs from the entity ids.
  void add(LabeledExample example);

  const DatasetSchema& schema() const { return schema_; }
  const std::vector<LabeledExample>& examples() const { return examples_; }
  const LabeledExample& operator[](std::size_t i) const { return examples_[i]; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }

  // Rows grouped by user key, groups in order of first appearance and rows
  // in dataset order.
  std::vector<UserGroup> group_by_user() const;
  std::vector<int> labels() const;
  Dataset subset(const std::vector<std::size_t>& rows) const;

 private:
  DatasetSchema schema_;
  std::vector<LabeledExample> examples_;
};

struct Violation {
  std::string location;
  std::string message;
};

// Every invariant violation across the graph set and (optionally) a dataset:
// negative or non-finite weights, schema types outside the catalog, entity
// ids outside their vocabulary, non-binary labels, ragged vectors.
std::vector<Violation> validate(const GraphSet& graphs, const Dataset* data = nullptr);

// Flat content-filtering features for one example: for every graph (in
// GraphSet order) that links a user-side type with an item-side type, the
// edge weight between the example's two instances (0 when absent); then the
// user vector, then the item vector.
std::vector<double> one_hop_features(const GraphSet& graphs,
                                     const DatasetSchema& schema,
                                     const LabeledExample& example);
// Names matching one_hop_features, e.g. "graph:cites", "user_vec:0".
std::vector<std::string> one_hop_feature_names(const GraphSet& graphs,
                                               const DatasetSchema& schema);

}  // namespace medres
