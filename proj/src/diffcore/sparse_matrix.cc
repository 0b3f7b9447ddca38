#include "medres/diffcore/sparse_matrix.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "medres/errors.h"

namespace medres {

namespace {

bool row_major_less(const SparseEntry& a, const SparseEntry& b) {
  return a.row != b.row ? a.row < b.row : a.col < b.col;
}

}  // namespace

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols) {}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<SparseEntry> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    if (e.row >= rows_ || e.col >= cols_) {
      throw DataError("sparse entry (" + std::to_string(e.row) + "," +
                      std::to_string(e.col) + ") outside " +
                      std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    if (!std::isfinite(e.value)) {
      throw NonFiniteError("non-finite sparse entry at (" +
                           std::to_string(e.row) + "," +
                           std::to_string(e.col) + ")");
    }
  }
  if (!std::is_sorted(entries_.begin(), entries_.end(), row_major_less)) {
    std::stable_sort(entries_.begin(), entries_.end(), row_major_less);
  }
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].row == entries_[i - 1].row &&
        entries_[i].col == entries_[i - 1].col) {
      throw DataError("duplicate sparse coordinate (" +
                      std::to_string(entries_[i].row) + "," +
                      std::to_string(entries_[i].col) + ")");
    }
  }
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<SparseEntry> e;
  e.reserve(n);
  for (std::size_t i = 0; i < n; ++i) e.push_back({i, i, 1.0});
  return SparseMatrix(n, n, std::move(e));
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
  const SparseEntry probe{row, col, 0.0};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), probe,
                             row_major_less);
  if (it != entries_.end() && it->row == row && it->col == col) return it->value;
  return 0.0;
}

Tensor SparseMatrix::densify() const {
  std::vector<double> d(rows_ * cols_, 0.0);
  for (const auto& e : entries_) d[e.row * cols_ + e.col] = e.value;
  return Tensor(rows_, cols_, std::move(d));
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<SparseEntry> t;
  t.reserve(entries_.size());
  for (const auto& e : entries_) t.push_back({e.col, e.row, e.value});
  return SparseMatrix(cols_, rows_, std::move(t));
}

SparseMatrix SparseMatrix::with_values(const std::vector<double>& values) const {
  if (values.size() != entries_.size()) {
    throw DimensionError("with_values: expected " +
                         std::to_string(entries_.size()) + " values, got " +
                         std::to_string(values.size()));
  }
  SparseMatrix out = *this;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw NonFiniteError("non-finite sparse value");
    }
    out.entries_[i].value = values[i];
  }
  return out;
}

Tensor sparse_dense_product(const SparseMatrix& s, const Tensor& x) {
  if (s.cols() != x.rows()) {
    throw DimensionError("spmm inner dimension mismatch: sparse " +
                         std::to_string(s.rows()) + "x" +
                         std::to_string(s.cols()) + " x " + x.shape_string());
  }
  const std::size_t p = x.cols();
  std::vector<double> out(s.rows() * p, 0.0);
  auto xd = x.data();
  for (const auto& e : s.entries()) {
    double* orow = out.data() + e.row * p;
    const double* xrow = xd.data() + e.col * p;
    for (std::size_t j = 0; j < p; ++j) orow[j] += e.value * xrow[j];
  }
  return Tensor(s.rows(), p, std::move(out));
}

}  // namespace medres
