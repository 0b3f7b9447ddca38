#pragma once

#include <cstddef>
#include <vector>

#include "medres/diffcore/ops.h"
#include "medres/entitygraph/graph_set.h"

// Stateless graph-embedding layers. Parameters come in as tape Vars; the
// classes in blocks.h own registration and naming.
namespace medres::embed {

// D^{-1/2} (A + I) D^{-1/2} with D the row sums of A + I. Square input only.
SparseMatrix normalize_adjacency(const SparseMatrix& a);

// ReLU(A X W), optionally with A replaced by its normalized form.
Var gcn_layer(const SparseMatrix& a, Var x, Var w, bool normalize = false);

// Learnable entrywise map of the stacked multi-graph weights:
// value(e) = sigmoid(alpha . A_hat(e) + beta), alpha m x 1, beta 1 x 1.
struct AdjacencyTransform {
  Var alpha;
  Var beta;
};

// Evaluated on the union support only: the result is nnz x 1 in support
// order and off-support entries stay zero. `stacked` is the nnz x m weight
// tensor of an AggregatedAdjacency, already on the tape.
Var transform_adjacency(Var stacked, const AdjacencyTransform& t);
Var transform_adjacency(Tape& tape, const AggregatedAdjacency& agg,
                        const AdjacencyTransform& t);
// Rectangular SparseMatrix carrying transformed values on the agg support.
SparseMatrix transformed_matrix(const AggregatedAdjacency& agg, Var values);

// Symmetric block layout of a type pair's union support. Entry k of
// `pattern` carries support edge `edge_of_entry[k]`; first-type nodes come
// first, so node ids are [0, rows) then [rows, rows + cols).
struct PairPropagation {
  SparseMatrix pattern;
  std::vector<std::size_t> edge_of_entry;
  std::size_t first_count = 0;
  std::size_t second_count = 0;

  std::size_t node_count() const { return first_count + second_count; }
};
PairPropagation pair_propagation(const AggregatedAdjacency& agg);

// Propagation step shared by every AL-GCN layer: branch p is
// ReLU(f_p(A_hat) * xw[p]), where xw holds either one product shared by all
// branches or one per branch, and `branch_values[p]` is the nnz x 1 output of
// transform_adjacency. Branches are concatenated in transform order.
Var algcn_propagate(const PairPropagation& prop, const std::vector<Var>& xw,
                    const std::vector<Var>& branch_values);

// X~^{l+1} = [ReLU(f_1(A_hat) X~ W), ..., ReLU(f_k(A_hat) X~ W)].
Var algcn_layer(const PairPropagation& prop, Var stacked, Var x, Var w,
                const std::vector<AdjacencyTransform>& transforms);

// Z = X~^1 (+) ... (+) X~^L, column-wise in layer order.
Var residual_concat(const std::vector<Var>& layer_outputs);

struct MergedEmbedding {
  Var first;   // rows = first-type vocabulary
  Var second;  // rows = second-type vocabulary
};

// ReLU([Z_1 ... Z_g] W + c), applied to each type's rows with its own W, c.
MergedEmbedding emb_merge(const std::vector<Var>& first_parts,
                          const std::vector<Var>& second_parts, Var w_first,
                          Var c_first, Var w_second, Var c_second);

// Row gather from a free embedding table; throws std::out_of_range on a bad id.
Var free_lookup(Var table, const std::vector<std::size_t>& ids);

}  // namespace medres::embed
