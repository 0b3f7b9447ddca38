#include "medres/diffcore/tape.h"

#include <stdexcept>

#include "medres/errors.h"

namespace medres {

const Tensor& Var::value() const {
  if (tape_ == nullptr) throw std::logic_error("unbound Var");
  return tape_->value(id_);
}

GradBuffers::GradBuffers(const Tape& tape)
    : tape_(tape), buffers_(tape.size()) {}

std::span<double> GradBuffers::at(std::size_t node) {
  auto& buf = buffers_[node];
  if (buf.empty()) buf.assign(tape_.value(node).size(), 0.0);
  return buf;
}

Var Tape::constant(Tensor value) {
  nodes_.push_back({std::move(value), {}, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const ParameterStore& store, const std::string& name) {
  auto it = parameter_nodes_.find(name);
  if (it != parameter_nodes_.end()) return Var(this, it->second);
  nodes_.push_back({store.get(name), {}, nullptr});
  parameter_nodes_.emplace(name, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs,
                 BackwardFn backward) {
  for (std::size_t in : inputs) {
    if (in >= nodes_.size()) {
      throw std::logic_error("tape input refers to a later node");
    }
  }
  nodes_.push_back({std::move(value), std::move(inputs), std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var loss, const ParameterStore* store) const {
  if (loss.tape() != this) throw std::logic_error("loss is on another tape");
  const Tensor& root = value(loss.id());
  if (root.rows() != 1 || root.cols() != 1) {
    throw DimensionError("backward root must be scalar, got " +
                         root.shape_string());
  }

  GradBuffers grads(*this);
  grads.at(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (!grads.touched(i) || !nodes_[i].backward) continue;
    std::span<double> g = grads.at(i);
    nodes_[i].backward(std::span<const double>(g.data(), g.size()), grads);
  }

  Gradients out;
  for (const auto& [name, id] : parameter_nodes_) {
    const Tensor& v = value(id);
    if (id <= loss.id() && grads.touched(id)) {
      auto g = grads.at(id);
      out.emplace(name, Tensor(v.rows(), v.cols(),
                               std::vector<double>(g.begin(), g.end())));
    } else {
      out.emplace(name, Tensor::zeros(v.rows(), v.cols()));
    }
  }
  if (store != nullptr) {
    for (const auto& [name, entry] : store->entries()) {
      if (out.count(name) == 0) {
        out.emplace(name, Tensor::zeros(entry.value.rows(), entry.value.cols()));
      }
    }
  }
  return out;
}

}  // namespace medres
