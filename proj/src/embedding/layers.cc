#include "medres/embedding/layers.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "medres/errors.h"

namespace medres::embed {

SparseMatrix normalize_adjacency(const SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("normalize_adjacency needs a square matrix, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
  const std::size_t n = a.rows();
  std::vector<SparseEntry> entries;
  entries.reserve(a.nnz() + n);
  std::vector<bool> has_diag(n, false);
  for (const auto& e : a.entries()) {
    if (e.row == e.col) {
      has_diag[e.row] = true;
      entries.push_back({e.row, e.col, e.value + 1.0});
    } else {
      entries.push_back(e);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_diag[i]) entries.push_back({i, i, 1.0});
  }
  SparseMatrix with_loops(n, n, std::move(entries));
  std::vector<double> degree(n, 0.0);
  for (const auto& e : with_loops.entries()) degree[e.row] += e.value;
  std::vector<double> values;
  values.reserve(with_loops.nnz());
  for (const auto& e : with_loops.entries()) {
    const double d = degree[e.row] * degree[e.col];
    values.push_back(d > 0.0 ? e.value / std::sqrt(d) : 0.0);
  }
  return with_loops.with_values(values);
}

Var gcn_layer(const SparseMatrix& a, Var x, Var w, bool normalize) {
  if (a.cols() != x.rows()) {
    throw DimensionError("gcn_layer: adjacency has " + std::to_string(a.cols()) +
                         " columns, features have " + std::to_string(x.rows()) +
                         " rows");
  }
  const Var xw = ops::matmul(x, w);
  return ops::relu(normalize ? ops::spmm(normalize_adjacency(a), xw)
                             : ops::spmm(a, xw));
}

Var transform_adjacency(Var stacked, const AdjacencyTransform& t) {
  if (t.alpha.rows() != stacked.cols() || t.alpha.cols() != 1) {
    throw DimensionError("transform alpha is " + t.alpha.value().shape_string() +
                         ", graph multiplicity is " + std::to_string(stacked.cols()));
  }
  if (t.beta.rows() != 1 || t.beta.cols() != 1) {
    throw DimensionError("transform beta must be 1x1");
  }
  return ops::sigmoid(ops::add(ops::matmul(stacked, t.alpha), t.beta));
}

Var transform_adjacency(Tape& tape, const AggregatedAdjacency& agg,
                        const AdjacencyTransform& t) {
  return transform_adjacency(tape.constant(agg.weights), t);
}

SparseMatrix transformed_matrix(const AggregatedAdjacency& agg, Var values) {
  const Tensor& v = values.value();
  if (v.rows() != agg.nnz() || v.cols() != 1) {
    throw DimensionError("transformed values must be " + std::to_string(agg.nnz()) +
                         "x1, got " + v.shape_string());
  }
  std::vector<SparseEntry> entries;
  entries.reserve(agg.nnz());
  for (std::size_t e = 0; e < agg.nnz(); ++e) {
    entries.push_back({agg.support[e].first, agg.support[e].second, v(e, 0)});
  }
  return SparseMatrix(agg.rows, agg.cols, std::move(entries));
}

PairPropagation pair_propagation(const AggregatedAdjacency& agg) {
  PairPropagation prop;
  prop.first_count = agg.rows;
  prop.second_count = agg.cols;
  const std::size_t na = agg.rows;
  // Carry the edge index through the constructor's sort in the value slot.
  std::vector<SparseEntry> entries;
  entries.reserve(2 * agg.nnz());
  for (std::size_t e = 0; e < agg.nnz(); ++e) {
    const auto [i, j] = agg.support[e];
    entries.push_back({i, na + j, static_cast<double>(e)});
    entries.push_back({na + j, i, static_cast<double>(e)});
  }
  SparseMatrix sorted(prop.node_count(), prop.node_count(), std::move(entries));
  prop.edge_of_entry.reserve(sorted.nnz());
  for (const auto& e : sorted.entries()) {
    prop.edge_of_entry.push_back(static_cast<std::size_t>(e.value));
  }
  prop.pattern = sorted.with_values(std::vector<double>(sorted.nnz(), 1.0));
  return prop;
}

Var algcn_propagate(const PairPropagation& prop, const std::vector<Var>& xw,
                    const std::vector<Var>& branch_values) {
  if (branch_values.empty()) throw DimensionError("algcn layer needs a transform");
  if (xw.size() != 1 && xw.size() != branch_values.size()) {
    throw DimensionError("algcn layer: " + std::to_string(xw.size()) +
                         " weight products for " +
                         std::to_string(branch_values.size()) + " transforms");
  }
  std::vector<Var> branches;
  branches.reserve(branch_values.size());
  for (std::size_t p = 0; p < branch_values.size(); ++p) {
    const Var h = xw.size() == 1 ? xw[0] : xw[p];
    if (h.rows() != prop.node_count()) {
      throw DimensionError("algcn layer input has " + std::to_string(h.rows()) +
                           " rows, pair has " + std::to_string(prop.node_count()) +
                           " nodes");
    }
    const Var block_values = ops::gather_rows(branch_values[p], prop.edge_of_entry);
    branches.push_back(ops::relu(ops::spmm(prop.pattern, block_values, h)));
  }
  return branches.size() == 1 ? branches[0] : ops::concat_cols(branches);
}

Var algcn_layer(const PairPropagation& prop, Var stacked, Var x, Var w,
                const std::vector<AdjacencyTransform>& transforms) {
  std::vector<Var> values;
  values.reserve(transforms.size());
  for (const auto& t : transforms) values.push_back(transform_adjacency(stacked, t));
  return algcn_propagate(prop, {ops::matmul(x, w)}, values);
}

Var residual_concat(const std::vector<Var>& layer_outputs) {
  if (layer_outputs.size() == 1) return layer_outputs[0];
  return ops::concat_cols(layer_outputs);
}

MergedEmbedding emb_merge(const std::vector<Var>& first_parts,
                          const std::vector<Var>& second_parts, Var w_first,
                          Var c_first, Var w_second, Var c_second) {
  auto side = [](const std::vector<Var>& parts, Var w, Var c) {
    const Var z = parts.size() == 1 ? parts[0] : ops::concat_cols(parts);
    if (c.rows() != 1 || c.cols() != w.cols()) {
      throw DimensionError("emb_merge bias must be 1x" + std::to_string(w.cols()));
    }
    return ops::relu(ops::add(ops::matmul(z, w), c));
  };
  return {side(first_parts, w_first, c_first), side(second_parts, w_second, c_second)};
}

Var free_lookup(Var table, const std::vector<std::size_t>& ids) {
  return ops::gather_rows(table, ids);
}

}  // namespace medres::embed
