#pragma once

#include <cstddef>
#include <vector>

#include "medres/diffcore/tensor.h"

namespace medres {

struct SparseEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Coordinate-list sparse matrix. Entries are unique per (row, col), kept in
// row-major order, in bounds, and finite. Explicit zeros are allowed: they
// are part of the support.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(std::size_t rows, std::size_t cols);
  // Sorts the entries; throws DataError on duplicates or out-of-range
  // coordinates and NonFiniteError on NaN/Inf values.
  SparseMatrix(std::size_t rows, std::size_t cols,
               std::vector<SparseEntry> entries);

  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<SparseEntry>& entries() const { return entries_; }
  // Stored value at (row, col), or 0 when the coordinate is off-support.
  double at(std::size_t row, std::size_t col) const;

  Tensor densify() const;
  SparseMatrix transposed() const;
  // Same support, new values (one per entry, in entry order).
  SparseMatrix with_values(const std::vector<double>& values) const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<SparseEntry> entries_;
};

// s * x without recording anything; the tape primitive wraps this.
Tensor sparse_dense_product(const SparseMatrix& s, const Tensor& x);

}  // namespace medres
