#include "medres/entitygraph/dataset.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "medres/errors.h"

namespace medres {

std::string default_user_key(const std::vector<std::size_t>& user_entities) {
  std::string key;
  for (std::size_t i = 0; i < user_entities.size(); ++i) {
    if (i > 0) key += '|';
    key += std::to_string(user_entities[i]);
  }
  return key;
}

void Dataset::add(LabeledExample example) {
  if (example.user_entities.size() != schema_.user_types.size() ||
      example.item_entities.size() != schema_.item_types.size()) {
    throw DataError("example entity counts do not match the schema");
  }
  if (example.user_vec.empty()) example.user_vec.assign(schema_.user_dim, 0.0);
  if (example.item_vec.empty()) example.item_vec.assign(schema_.item_dim, 0.0);
  if (example.user_vec.size() != schema_.user_dim ||
      example.item_vec.size() != schema_.item_dim) {
    throw DataError("dynamic vector width differs from the schema (user " +
                    std::to_string(example.user_vec.size()) + "/" +
                    std::to_string(schema_.user_dim) + ", item " +
                    std::to_string(example.item_vec.size()) + "/" +
                    std::to_string(schema_.item_dim) + ")");
  }
  if (example.label != 0 && example.label != 1) {
    throw DataError("label must be 0 or 1, got " + std::to_string(example.label));
  }
  for (double v : example.user_vec) {
    if (!std::isfinite(v)) throw DataError("non-finite user vector entry");
  }
  for (double v : example.item_vec) {
    if (!std::isfinite(v)) throw DataError("non-finite item vector entry");
  }
  if (example.user_key.empty()) {
    example.user_key = default_user_key(example.user_entities);
  }
  if (example.item_ref.empty()) {
    example.item_ref = default_user_key(example.item_entities);
  }
  examples_.push_back(std::move(example));
}

std::vector<UserGroup> Dataset::group_by_user() const {
  std::vector<UserGroup> groups;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(examples_[i].user_key, groups.size());
    if (inserted) groups.push_back({examples_[i].user_key, {}});
    groups[it->second].rows.push_back(i);
  }
  return groups;
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(examples_.size());
  for (const auto& e : examples_) out.push_back(e.label);
  return out;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out(schema_);
  out.examples_.reserve(rows.size());
  for (std::size_t r : rows) out.examples_.push_back(examples_.at(r));
  return out;
}

std::vector<Violation> validate(const GraphSet& graphs, const Dataset* data) {
  std::vector<Violation> out;
  const auto& cat = graphs.catalog();
  for (const auto& g : graphs.graphs()) {
    for (const auto& e : g.adjacency.entries()) {
      if (!(e.value >= 0.0) || !std::isfinite(e.value)) {
        out.push_back({"graph " + g.name + " edge (" + std::to_string(e.row) +
                           "," + std::to_string(e.col) + ")",
                       "weight must be finite and non-negative, got " +
                           std::to_string(e.value)});
      }
    }
  }
  if (data == nullptr) return out;

  const auto& schema = data->schema();
  auto check_types = [&](const std::vector<std::size_t>& types, const char* side) {
    for (std::size_t i = 0; i < types.size(); ++i) {
      if (types[i] >= cat.type_count()) {
        out.push_back({std::string("schema ") + side + " type " + std::to_string(i),
                       "type index outside the catalog"});
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (types[j] == types[i]) {
          out.push_back({std::string("schema ") + side + " type " + std::to_string(i),
                         "entity type listed twice"});
        }
      }
    }
  };
  const std::size_t before_schema = out.size();
  check_types(schema.user_types, "user");
  check_types(schema.item_types, "item");
  // Per-example checks index the catalog through the schema.
  if (out.size() != before_schema) return out;

  for (std::size_t i = 0; i < data->size(); ++i) {
    const auto& ex = (*data)[i];
    const std::string where = "example " + std::to_string(i);
    auto check_ids = [&](const std::vector<std::size_t>& ids,
                         const std::vector<std::size_t>& types, const char* side) {
      if (ids.size() != types.size()) {
        out.push_back({where, std::string(side) + " entity count mismatch"});
        return;
      }
      for (std::size_t k = 0; k < ids.size(); ++k) {
        const auto& t = cat.type(types[k]);
        if (ids[k] >= t.size) {
          out.push_back({where, std::string(side) + " " + t.name + " id " +
                                    std::to_string(ids[k]) + " outside [0," +
                                    std::to_string(t.size) + ")"});
        }
      }
    };
    check_ids(ex.user_entities, schema.user_types, "user");
    check_ids(ex.item_entities, schema.item_types, "item");
    if (ex.label != 0 && ex.label != 1) out.push_back({where, "label not binary"});
    if (ex.user_vec.size() != schema.user_dim || ex.item_vec.size() != schema.item_dim) {
      out.push_back({where, "dynamic vector width differs from the schema"});
    }
  }
  return out;
}

namespace {

struct Link {
  std::size_t graph;
  bool user_is_source;
  std::size_t user_slot;
  std::size_t item_slot;
};

std::vector<Link> user_item_links(const GraphSet& graphs, const DatasetSchema& schema) {
  auto slot_of = [](const std::vector<std::size_t>& types, std::size_t t) -> long {
    auto it = std::find(types.begin(), types.end(), t);
    return it == types.end() ? -1 : static_cast<long>(it - types.begin());
  };
  std::vector<Link> links;
  for (std::size_t gi = 0; gi < graphs.graphs().size(); ++gi) {
    const auto& g = graphs.graphs()[gi];
    const long us = slot_of(schema.user_types, g.source_type);
    const long it = slot_of(schema.item_types, g.target_type);
    if (us >= 0 && it >= 0) {
      links.push_back({gi, true, static_cast<std::size_t>(us), static_cast<std::size_t>(it)});
      continue;
    }
    const long is = slot_of(schema.item_types, g.source_type);
    const long ut = slot_of(schema.user_types, g.target_type);
    if (is >= 0 && ut >= 0) {
      links.push_back({gi, false, static_cast<std::size_t>(ut), static_cast<std::size_t>(is)});
    }
  }
  return links;
}

}  // namespace

std::vector<double> one_hop_features(const GraphSet& graphs,
                                     const DatasetSchema& schema,
                                     const LabeledExample& example) {
  std::vector<double> out;
  for (const auto& link : user_item_links(graphs, schema)) {
    const auto& a = graphs.graphs()[link.graph].adjacency;
    const std::size_t u = example.user_entities.at(link.user_slot);
    const std::size_t i = example.item_entities.at(link.item_slot);
    out.push_back(link.user_is_source ? a.at(u, i) : a.at(i, u));
  }
  out.insert(out.end(), example.user_vec.begin(), example.user_vec.end());
  out.insert(out.end(), example.item_vec.begin(), example.item_vec.end());
  return out;
}

std::vector<std::string> one_hop_feature_names(const GraphSet& graphs,
                                               const DatasetSchema& schema) {
  std::vector<std::string> names;
  for (const auto& link : user_item_links(graphs, schema)) {
    names.push_back("graph:" + graphs.graphs()[link.graph].name);
  }
  for (std::size_t i = 0; i < schema.user_dim; ++i) names.push_back("user_vec:" + std::to_string(i));
  for (std::size_t i = 0; i < schema.item_dim; ++i) names.push_back("item_vec:" + std::to_string(i));
  return names;
}

}  // namespace medres
