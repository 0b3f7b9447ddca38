#include "medres/entitygraph/catalog.h"

#include <stdexcept>

#include "medres/errors.h"

namespace medres {

std::size_t EntityCatalog::add_type(std::string name, std::size_t size,
                                    std::optional<Tensor> features) {
  if (find(name)) {
    throw std::invalid_argument("duplicate entity type: " + name);
  }
  if (features && features->rows() != size) {
    throw DimensionError("features for " + name + " have " +
                         std::to_string(features->rows()) + " rows, expected " +
                         std::to_string(size));
  }
  types_.push_back({std::move(name), size, std::move(features)});
  return types_.size() - 1;
}

std::optional<std::size_t> EntityCatalog::find(const std::string& name) const {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t EntityCatalog::index_of(const std::string& name) const {
  auto idx = find(name);
  if (!idx) throw std::invalid_argument("unknown entity type: " + name);
  return *idx;
}

}  // namespace medres
