#include "medres/entitygraph/graph_set.h"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "medres/errors.h"

namespace medres {

void GraphSet::add_graph(BipartiteGraph graph) {
  const std::size_t n_types = catalog_.type_count();
  if (graph.source_type >= n_types || graph.target_type >= n_types) {
    throw std::invalid_argument("graph " + graph.name +
                                " references an unknown entity type");
  }
  if (graph.source_type == graph.target_type) {
    throw std::invalid_argument("graph " + graph.name +
                                ": same-type graphs are not supported");
  }
  const auto& src = catalog_.type(graph.source_type);
  const auto& dst = catalog_.type(graph.target_type);
  if (graph.adjacency.rows() != src.size || graph.adjacency.cols() != dst.size) {
    throw DimensionError("graph " + graph.name + " adjacency is " +
                         std::to_string(graph.adjacency.rows()) + "x" +
                         std::to_string(graph.adjacency.cols()) + ", expected " +
                         std::to_string(src.size) + "x" + std::to_string(dst.size));
  }
  for (const auto& g : graphs_) {
    if (g.name == graph.name) {
      throw std::invalid_argument("duplicate graph name: " + graph.name);
    }
  }
  graphs_.push_back(std::move(graph));
}

const BipartiteGraph& GraphSet::graph(const std::string& name) const {
  for (const auto& g : graphs_) {
    if (g.name == name) return g;
  }
  throw std::invalid_argument("unknown graph: " + name);
}

std::vector<TypePair> GraphSet::pairs() const {
  std::vector<TypePair> out;
  for (const auto& g : graphs_) {
    TypePair p = TypePair::of(g.source_type, g.target_type);
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

std::vector<std::size_t> GraphSet::graphs_for(TypePair pair) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < graphs_.size(); ++i) {
    if (TypePair::of(graphs_[i].source_type, graphs_[i].target_type) == pair) {
      out.push_back(i);
    }
  }
  return out;
}

SparseMatrix AggregatedAdjacency::component(std::size_t p) const {
  std::vector<SparseEntry> entries;
  for (std::size_t e = 0; e < support.size(); ++e) {
    const double w = weights(e, p);
    if (w != 0.0) entries.push_back({support[e].first, support[e].second, w});
  }
  return SparseMatrix(rows, cols, std::move(entries));
}

SparseMatrix oriented_adjacency(const GraphSet& graphs, std::size_t index,
                                TypePair pair) {
  const auto& g = graphs.graphs().at(index);
  if (TypePair::of(g.source_type, g.target_type) != pair) {
    throw std::invalid_argument("graph " + g.name + " is not in the pair");
  }
  return g.source_type == pair.first ? g.adjacency : g.adjacency.transposed();
}

AggregatedAdjacency aggregate(const GraphSet& graphs, TypePair pair) {
  const auto members = graphs.graphs_for(pair);
  if (members.empty()) {
    throw std::invalid_argument("no graph connects types " +
                                std::to_string(pair.first) + " and " +
                                std::to_string(pair.second));
  }
  const std::size_t m = members.size();
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> edges;
  AggregatedAdjacency agg;
  agg.pair = pair;
  agg.rows = graphs.catalog().type(pair.first).size;
  agg.cols = graphs.catalog().type(pair.second).size;
  for (std::size_t p = 0; p < m; ++p) {
    agg.graph_names.push_back(graphs.graphs()[members[p]].name);
    const SparseMatrix a = oriented_adjacency(graphs, members[p], pair);
    for (const auto& e : a.entries()) {
      auto [it, _] = edges.try_emplace({e.row, e.col}, std::vector<double>(m, 0.0));
      it->second[p] = e.value;
    }
  }
  std::vector<double> flat;
  flat.reserve(edges.size() * m);
  for (const auto& [coord, w] : edges) {
    agg.support.push_back(coord);
    flat.insert(flat.end(), w.begin(), w.end());
  }
  agg.weights = Tensor(edges.size(), m, std::move(flat));
  return agg;
}

SparseMatrix block_adjacency(const SparseMatrix& rect) {
  const std::size_t na = rect.rows();
  const std::size_t n = na + rect.cols();
  std::vector<SparseEntry> entries;
  entries.reserve(2 * rect.nnz());
  for (const auto& e : rect.entries()) {
    entries.push_back({e.row, na + e.col, e.value});
    entries.push_back({na + e.col, e.row, e.value});
  }
  return SparseMatrix(n, n, std::move(entries));
}

SparseMatrix block_adjacency(const BipartiteGraph& graph) {
  return block_adjacency(graph.adjacency);
}

namespace {

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

}  // namespace

std::string graph_set_digest(const GraphSet& graphs) {
  Fnv1a h;
  const auto& cat = graphs.catalog();
  h.u64(cat.type_count());
  for (const auto& t : cat.types()) {
    h.str(t.name);
    h.u64(t.size);
    h.u64(t.features ? t.features->cols() : 0);
    if (t.features) {
      for (double v : t.features->data()) h.f64(v);
    }
  }
  h.u64(graphs.graphs().size());
  for (const auto& g : graphs.graphs()) {
    h.str(g.name);
    h.u64(g.source_type);
    h.u64(g.target_type);
    h.u64(g.adjacency.nnz());
    for (const auto& e : g.adjacency.entries()) {
      h.u64(e.row);
      h.u64(e.col);
      h.f64(e.value);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h.value()));
  return buf;
}

}  // namespace medres
