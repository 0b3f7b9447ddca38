#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "medres/diffcore/sparse_matrix.h"
#include "medres/entitygraph/catalog.h"

namespace medres {

// Weighted bipartite interaction graph, stored directed as given:
// adjacency rows are source-type instances, columns target-type instances.
struct BipartiteGraph {
  std::string name;
  std::size_t source_type = 0;
  std::size_t target_type = 0;
  SparseMatrix adjacency;
};

// Unordered pair of entity types, canonicalised so that first < second.
struct TypePair {
  std::size_t first = 0;
  std::size_t second = 0;

  static TypePair of(std::size_t a, std::size_t b) {
    return a < b ? TypePair{a, b} : TypePair{b, a};
  }
  bool contains(std::size_t t) const { return t == first || t == second; }
  friend bool operator==(const TypePair&, const TypePair&) = default;
};

class GraphSet {
 public:
  GraphSet() = default;
  explicit GraphSet(EntityCatalog catalog) : catalog_(std::move(catalog)) {}

  // Checks that both endpoint types exist, that they differ, that the
  // adjacency matches the vocabulary sizes, and that the name is unused.
  // Edge weights are checked by validate().
  void add_graph(BipartiteGraph graph);

  const EntityCatalog& catalog() const { return catalog_; }
  const std::vector<BipartiteGraph>& graphs() const { return graphs_; }
  const BipartiteGraph& graph(const std::string& name) const;

  // Type pairs that carry at least one graph, in order of first appearance.
  std::vector<TypePair> pairs() const;
  // Indices into graphs() of every graph between the pair's two types.
  std::vector<std::size_t> graphs_for(TypePair pair) const;

 private:
  EntityCatalog catalog_;
  std::vector<BipartiteGraph> graphs_;
};

// Union-support view of every graph between a type pair. Rows index the
// pair's first type, columns its second; graphs stored the other way round
// are transposed. weights(e, p) is graph p's weight on support edge e, or 0.
struct AggregatedAdjacency {
  TypePair pair;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::pair<std::size_t, std::size_t>> support;
  Tensor weights;
  std::vector<std::string> graph_names;

  std::size_t multiplicity() const { return graph_names.size(); }
  std::size_t nnz() const { return support.size(); }
  // Graph p restricted to the union support, with explicit zeros dropped.
  SparseMatrix component(std::size_t p) const;
};

// Throws std::invalid_argument if no graph connects the pair.
AggregatedAdjacency aggregate(const GraphSet& graphs, TypePair pair);

// Adjacency of graph `index` oriented so rows are `pair.first` instances.
SparseMatrix oriented_adjacency(const GraphSet& graphs, std::size_t index,
                                TypePair pair);

// [[0, R], [R^T, 0]] for a rectangular R, row-side nodes first.
SparseMatrix block_adjacency(const SparseMatrix& rect);
SparseMatrix block_adjacency(const BipartiteGraph& graph);

// 64-bit FNV-1a over the catalog (names, sizes, features) and every graph
// (name, endpoints, edges). Rendered as 16 hex digits.
std::string graph_set_digest(const GraphSet& graphs);

}  // namespace medres
