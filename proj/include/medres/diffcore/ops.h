#pragma once

#include <cstddef>
#include <vector>

#include "medres/diffcore/sparse_matrix.h"
#include "medres/diffcore/tape.h"

// Differentiable primitives. Every function records one node on the tape of
// its operands (all operands must share a tape) and throws DimensionError on
// incompatible shapes.
namespace medres::ops {

Var matmul(Var a, Var b);

// Constant sparse matrix times a dense operand.
Var spmm(const SparseMatrix& s, Var x);
// Sparse matrix whose support comes from `pattern` and whose values are the
// nnz x 1 operand `values` (in pattern entry order). Gradients reach both the
// values and x.
Var spmm(const SparseMatrix& pattern, Var values, Var x);

// a + b, where b is either the same shape as a or a 1 x cols(a) bias row.
Var add(Var a, Var b);
Var scale(Var a, double factor);

Var relu(Var x);
Var sigmoid(Var x);

// Column-wise concatenation in operand order. Operands share a row count.
Var concat_cols(const std::vector<Var>& xs);
// Row-wise concatenation in operand order. Operands share a column count.
Var concat_rows(const std::vector<Var>& xs);

Var slice_rows(Var x, std::size_t begin, std::size_t count);
// out[i] = x[ids[i]]; the gradient scatters back to the selected rows only.
Var gather_rows(Var x, const std::vector<std::size_t>& ids);

Var sum(Var x);
Var sum_squares(Var x);

// Mean binary cross-entropy. Predictions are clamped to [eps, 1 - eps]
// before the log (eps = 1e-12); a prediction outside [0, 1] or a label
// outside {0, 1} throws std::domain_error.
inline constexpr double kBceClamp = 1e-12;
Var bce(Var pred, const Tensor& labels);

}  // namespace medres::ops
