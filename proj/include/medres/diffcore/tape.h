#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "medres/diffcore/parameter_store.h"
#include "medres/diffcore/tensor.h"

namespace medres {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Gradient accumulators indexed by node id, allocated on first touch and
// zero-initialised. Fan-out is handled by additive accumulation.
class GradBuffers {
 public:
  explicit GradBuffers(const Tape& tape);
  std::span<double> at(std::size_t node);
  bool touched(std::size_t node) const { return !buffers_[node].empty(); }

 private:
  const Tape& tape_;
  std::vector<std::vector<double>> buffers_;
};

// Pulls the output gradient back into the inputs' buffers.
using BackwardFn =
    std::function<void(std::span<const double> grad_out, GradBuffers& grads)>;

// Append-only record of primitive applications. Inputs always precede the
// node that consumes them, so the tape is acyclic by construction and a
// single reverse sweep visits every node once.
//
// A Tape belongs to one thread.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Leaf bound to a store entry. Repeated requests for the same name return
  // the same node so that gradients from every use accumulate together.
  Var parameter(const ParameterStore& store, const std::string& name);

  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  std::size_t size() const { return nodes_.size(); }

  // Reverse sweep from a 1x1 root. Returns the gradient for every parameter
  // leaf on the tape (zeros when the loss does not reach it); when `store` is
  // given, every store entry gets an entry too.
  Gradients backward(Var loss, const ParameterStore* store = nullptr) const;

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::map<std::string, std::size_t> parameter_nodes_;
};

}  // namespace medres
