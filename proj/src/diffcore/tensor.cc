#include "medres/diffcore/tensor.h"

#include <algorithm>
#include <cmath>

#include "medres/errors.h"

namespace medres {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_string());
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw NonFiniteError("non-finite value at flat index " +
                           std::to_string(i) + " of tensor " + shape_string());
    }
  }
}

Tensor::Tensor(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<double> flat;
  std::size_t cols = rows.size() == 0 ? 0 : rows.begin()->size();
  for (const auto& r : rows) {
    if (r.size() != cols) throw DimensionError("ragged tensor literal");
    flat.insert(flat.end(), r.begin(), r.end());
  }
  *this = Tensor(rows.size(), cols, std::move(flat));
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) {
  return full(rows, cols, 0.0);
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double value) {
  return Tensor(rows, cols, std::vector<double>(rows * cols, value));
}

Tensor Tensor::identity(std::size_t n) {
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 1.0;
  return Tensor(n, n, std::move(d));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw DimensionError("item() on non-scalar tensor " + shape_string());
  }
  return data_[0];
}

std::string Tensor::shape_string() const {
  return "[" + std::to_string(rows_) + "x" + std::to_string(cols_) + "]";
}

Tensor dense_matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul inner dimension mismatch: " +
                         a.shape_string() + " x " + b.shape_string());
  }
  const std::size_t m = a.rows(), n = a.cols(), p = b.cols();
  std::vector<double> out(m * p, 0.0);
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out.data() + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = ad[i * n + k];
      if (aik == 0.0) continue;
      const double* brow = bd.data() + k * p;
      for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
    }
  }
  return Tensor(m, p, std::move(out));
}

Tensor transpose(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      out[c * a.rows() + r] = a(r, c);
  return Tensor(a.cols(), a.rows(), std::move(out));
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("max_abs_diff shape mismatch: " + a.shape_string() +
                         " vs " + b.shape_string());
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace medres
