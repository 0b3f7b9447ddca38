#include "medres/diffcore/ops.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "medres/errors.h"

namespace medres::ops {

namespace {

Tape& common_tape(std::initializer_list<Var> vars) {
  Tape* tape = nullptr;
  for (const Var& v : vars) {
    if (v.tape() == nullptr) throw std::logic_error("unbound Var operand");
    if (tape == nullptr) tape = v.tape();
    if (v.tape() != tape) throw std::logic_error("operands on different tapes");
  }
  return *tape;
}

Tape& common_tape(const std::vector<Var>& vars) {
  if (vars.empty()) throw DimensionError("empty operand list");
  Tape* tape = vars.front().tape();
  for (const Var& v : vars) {
    if (v.tape() != tape || tape == nullptr) {
      throw std::logic_error("operands on different tapes");
    }
  }
  return *tape;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = common_tape({a, b});
  Tensor out = dense_matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {ia, ib},
                     [&tape, ia, ib](std::span<const double> g, GradBuffers& grads) {
    const Tensor& A = tape.value(ia);
    const Tensor& B = tape.value(ib);
    const std::size_t m = A.rows(), n = A.cols(), p = B.cols();
    auto ad = A.data();
    auto bd = B.data();
    // dA = g * B^T
    {
      auto ga = grads.at(ia);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
          double acc = 0.0;
          for (std::size_t j = 0; j < p; ++j) acc += g[i * p + j] * bd[k * p + j];
          ga[i * n + k] += acc;
        }
      }
    }
    // dB = A^T * g
    {
      auto gb = grads.at(ib);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
          const double aik = ad[i * n + k];
          if (aik == 0.0) continue;
          for (std::size_t j = 0; j < p; ++j) gb[k * p + j] += aik * g[i * p + j];
        }
      }
    }
  });
}

Var spmm(const SparseMatrix& s, Var x) {
  Tape& tape = common_tape({x});
  Tensor out = sparse_dense_product(s, x.value());
  const std::size_t ix = x.id();
  const std::size_t p = x.cols();
  return tape.record(std::move(out), {ix},
                     [s, ix, p](std::span<const double> g, GradBuffers& grads) {
    auto gx = grads.at(ix);
    for (const auto& e : s.entries()) {
      const double* grow = g.data() + e.row * p;
      double* xrow = gx.data() + e.col * p;
      for (std::size_t j = 0; j < p; ++j) xrow[j] += e.value * grow[j];
    }
  });
}

Var spmm(const SparseMatrix& pattern, Var values, Var x) {
  Tape& tape = common_tape({values, x});
  const Tensor& vals = values.value();
  if (vals.rows() != pattern.nnz() || vals.cols() != 1) {
    throw DimensionError("spmm values must be " + std::to_string(pattern.nnz()) +
                         "x1, got " + vals.shape_string());
  }
  std::vector<double> v(vals.data().begin(), vals.data().end());
  SparseMatrix s = pattern.with_values(v);
  Tensor out = sparse_dense_product(s, x.value());
  const std::size_t iv = values.id(), ix = x.id();
  const std::size_t p = x.cols();
  return tape.record(std::move(out), {iv, ix},
                     [&tape, s, iv, ix, p](std::span<const double> g,
                                           GradBuffers& grads) {
    auto xd = tape.value(ix).data();
    {
      auto gv = grads.at(iv);
      const auto& entries = s.entries();
      for (std::size_t k = 0; k < entries.size(); ++k) {
        const double* grow = g.data() + entries[k].row * p;
        const double* xrow = xd.data() + entries[k].col * p;
        double acc = 0.0;
        for (std::size_t j = 0; j < p; ++j) acc += grow[j] * xrow[j];
        gv[k] += acc;
      }
    }
    auto gx = grads.at(ix);
    for (const auto& e : s.entries()) {
      const double* grow = g.data() + e.row * p;
      double* xrow = gx.data() + e.col * p;
      for (std::size_t j = 0; j < p; ++j) xrow[j] += e.value * grow[j];
    }
  });
}

Var add(Var a, Var b) {
  Tape& tape = common_tape({a, b});
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const bool bias_row = B.rows() == 1 && B.cols() == A.cols() && A.rows() != 1;
  if (!A.same_shape(B) && !bias_row) {
    throw DimensionError("add shape mismatch: " + A.shape_string() + " + " +
                         B.shape_string());
  }
  const std::size_t cols = A.cols();
  std::vector<double> out(A.data().begin(), A.data().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] += bias_row ? B.data()[i % cols] : B.data()[i];
  }
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(Tensor(A.rows(), cols, std::move(out)), {ia, ib},
                     [ia, ib, bias_row, cols](std::span<const double> g,
                                              GradBuffers& grads) {
    auto ga = grads.at(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto gb = grads.at(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[bias_row ? i % cols : i] += g[i];
  });
}

Var scale(Var a, double factor) {
  Tape& tape = common_tape({a});
  const Tensor& A = a.value();
  std::vector<double> out(A.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = A.data()[i] * factor;
  const std::size_t ia = a.id();
  return tape.record(Tensor(A.rows(), A.cols(), std::move(out)), {ia},
                     [ia, factor](std::span<const double> g, GradBuffers& grads) {
    auto ga = grads.at(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
  });
}

Var relu(Var x) {
  Tape& tape = common_tape({x});
  const Tensor& X = x.value();
  std::vector<double> out(X.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, X.data()[i]);
  const std::size_t ix = x.id();
  return tape.record(Tensor(X.rows(), X.cols(), std::move(out)), {ix},
                     [&tape, ix](std::span<const double> g, GradBuffers& grads) {
    auto xd = tape.value(ix).data();
    auto gx = grads.at(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (xd[i] > 0.0) gx[i] += g[i];
    }
  });
}

Var sigmoid(Var x) {
  Tape& tape = common_tape({x});
  const Tensor& X = x.value();
  std::vector<double> out(X.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = X.data()[i];
    // Split by sign so exp never overflows.
    if (v >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      out[i] = e / (1.0 + e);
    }
  }
  const std::size_t ix = x.id();
  // The node about to be recorded; its value is the sigmoid output.
  const std::size_t iy = tape.size();
  return tape.record(Tensor(X.rows(), X.cols(), std::move(out)), {ix},
                     [&tape, iy, ix](std::span<const double> g, GradBuffers& grads) {
    auto yd = tape.value(iy).data();
    auto gx = grads.at(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yd[i] * (1.0 - yd[i]);
  });
}

Var concat_cols(const std::vector<Var>& xs) {
  Tape& tape = common_tape(xs);
  const std::size_t rows = xs.front().rows();
  std::size_t total = 0;
  std::vector<std::size_t> widths, ids;
  for (const Var& v : xs) {
    if (v.rows() != rows) {
      throw DimensionError("concat_cols row mismatch: " + std::to_string(rows) +
                           " vs " + std::to_string(v.rows()));
    }
    widths.push_back(v.cols());
    ids.push_back(v.id());
    total += v.cols();
  }
  std::vector<double> out(rows * total);
  std::size_t offset = 0;
  for (const Var& v : xs) {
    const Tensor& t = v.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy(t.row(r).begin(), t.row(r).end(), out.begin() + r * total + offset);
    }
    offset += t.cols();
  }
  return tape.record(Tensor(rows, total, std::move(out)), ids,
                     [ids, widths, rows, total](std::span<const double> g,
                                                GradBuffers& grads) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const std::size_t w = widths[k];
      if (w > 0) {
        auto gk = grads.at(ids[k]);
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < w; ++j) gk[r * w + j] += g[r * total + offset + j];
      }
      offset += w;
    }
  });
}

Var concat_rows(const std::vector<Var>& xs) {
  Tape& tape = common_tape(xs);
  const std::size_t cols = xs.front().cols();
  std::vector<double> out;
  std::vector<std::size_t> ids, sizes;
  std::size_t rows = 0;
  for (const Var& v : xs) {
    if (v.cols() != cols) {
      throw DimensionError("concat_rows column mismatch: " + std::to_string(cols) +
                           " vs " + std::to_string(v.cols()));
    }
    out.insert(out.end(), v.value().data().begin(), v.value().data().end());
    ids.push_back(v.id());
    sizes.push_back(v.value().size());
    rows += v.rows();
  }
  return tape.record(Tensor(rows, cols, std::move(out)), ids,
                     [ids, sizes](std::span<const double> g, GradBuffers& grads) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (sizes[k] > 0) {
        auto gk = grads.at(ids[k]);
        for (std::size_t i = 0; i < sizes[k]; ++i) gk[i] += g[offset + i];
      }
      offset += sizes[k];
    }
  });
}

Var slice_rows(Var x, std::size_t begin, std::size_t count) {
  Tape& tape = common_tape({x});
  const Tensor& X = x.value();
  if (begin + count > X.rows()) {
    throw DimensionError("slice_rows [" + std::to_string(begin) + "," +
                         std::to_string(begin + count) + ") outside " +
                         X.shape_string());
  }
  const std::size_t cols = X.cols();
  std::vector<double> out(X.data().begin() + begin * cols,
                          X.data().begin() + (begin + count) * cols);
  const std::size_t ix = x.id();
  return tape.record(Tensor(count, cols, std::move(out)), {ix},
                     [ix, begin, cols](std::span<const double> g, GradBuffers& grads) {
    auto gx = grads.at(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * cols + i] += g[i];
  });
}

Var gather_rows(Var x, const std::vector<std::size_t>& ids) {
  Tape& tape = common_tape({x});
  const Tensor& X = x.value();
  const std::size_t cols = X.cols();
  std::vector<double> out;
  out.reserve(ids.size() * cols);
  for (std::size_t id : ids) {
    if (id >= X.rows()) {
      throw std::out_of_range("gather_rows: row " + std::to_string(id) +
                              " outside " + X.shape_string());
    }
    out.insert(out.end(), X.row(id).begin(), X.row(id).end());
  }
  const std::size_t ix = x.id();
  return tape.record(Tensor(ids.size(), cols, std::move(out)), {ix},
                     [ix, ids, cols](std::span<const double> g, GradBuffers& grads) {
    auto gx = grads.at(ix);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j) gx[ids[i] * cols + j] += g[i * cols + j];
  });
}

Var sum(Var x) {
  Tape& tape = common_tape({x});
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  const std::size_t ix = x.id();
  return tape.record(Tensor::scalar(total), {ix},
                     [ix](std::span<const double> g, GradBuffers& grads) {
    auto gx = grads.at(ix);
    for (double& v : gx) v += g[0];
  });
}

Var sum_squares(Var x) {
  Tape& tape = common_tape({x});
  double total = 0.0;
  for (double v : x.value().data()) total += v * v;
  const std::size_t ix = x.id();
  return tape.record(Tensor::scalar(total), {ix},
                     [&tape, ix](std::span<const double> g, GradBuffers& grads) {
    auto xd = tape.value(ix).data();
    auto gx = grads.at(ix);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += 2.0 * xd[i] * g[0];
  });
}

Var bce(Var pred, const Tensor& labels) {
  Tape& tape = common_tape({pred});
  const Tensor& P = pred.value();
  if (!P.same_shape(labels)) {
    throw DimensionError("bce shape mismatch: " + P.shape_string() + " vs " +
                         labels.shape_string());
  }
  if (P.size() == 0) throw DimensionError("bce on empty batch");
  const double n = static_cast<double>(P.size());
  double total = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const double p = P.data()[i];
    const double y = labels.data()[i];
    if (p < 0.0 || p > 1.0) {
      throw std::domain_error("bce prediction outside [0,1]: " + std::to_string(p));
    }
    if (y != 0.0 && y != 1.0) {
      throw std::domain_error("bce label not in {0,1}: " + std::to_string(y));
    }
    const double pc = std::clamp(p, kBceClamp, 1.0 - kBceClamp);
    total -= y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc);
  }
  const std::size_t ip = pred.id();
  return tape.record(Tensor::scalar(total / n), {ip},
                     [&tape, ip, labels, n](std::span<const double> g,
                                            GradBuffers& grads) {
    auto pd = tape.value(ip).data();
    auto gp = grads.at(ip);
    for (std::size_t i = 0; i < gp.size(); ++i) {
      const double p = pd[i];
      if (p < kBceClamp || p > 1.0 - kBceClamp) continue;
      const double y = labels.data()[i];
      gp[i] += g[0] * (-(y / p) + (1.0 - y) / (1.0 - p)) / n;
    }
  });
}

}  // namespace medres::ops
