#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "medres/diffcore/tensor.h"

namespace medres {

// One entity type: a contiguous id vocabulary [0, size) and an optional
// per-instance feature matrix. Without features the embedding layers use a
// one-hot encoding of the instances.
struct EntityType {
  std::string name;
  std::size_t size = 0;
  std::optional<Tensor> features;
};

class EntityCatalog {
 public:
  // Returns the new type's index. Throws std::invalid_argument on a duplicate
  // name and DimensionError when the feature rows differ from `size`.
  std::size_t add_type(std::string name, std::size_t size,
                       std::optional<Tensor> features = std::nullopt);

  std::size_t type_count() const { return types_.size(); }
  const EntityType& type(std::size_t index) const { return types_.at(index); }
  const std::vector<EntityType>& types() const { return types_; }

  std::optional<std::size_t> find(const std::string& name) const;
  // Throws std::invalid_argument for unknown names.
  std::size_t index_of(const std::string& name) const;

 private:
  std::vector<EntityType> types_;
};

}  // namespace medres
