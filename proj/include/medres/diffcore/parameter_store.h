#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "medres/diffcore/tensor.h"

namespace medres {

using Gradients = std::map<std::string, Tensor>;

// Named trainable tensors plus the Adam moments for each of them.
class ParameterStore {
 public:
  struct Entry {
    Tensor value;
    Tensor first_moment;
    Tensor second_moment;
    std::int64_t step = 0;
    // Whether the L2 penalty applies. Biases and free embedding tables are
    // registered with decay = false.
    bool decay = true;
  };

  // Throws std::invalid_argument if the name is taken.
  void add(const std::string& name, Tensor init, bool decay = true);

  bool contains(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
  const Entry& entry(const std::string& name) const;
  // Replaces the value; the shape must match. Moments are kept.
  void set(const std::string& name, Tensor value);
  // Overwrites optimizer state, used when restoring checkpoints.
  void set_state(const std::string& name, Tensor first, Tensor second,
                 std::int64_t step);

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;

  // Sum of squares over every parameter, or only the decayed ones.
  double squared_norm(bool decayed_only) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }

 private:
  Entry& mutable_entry(const std::string& name);

  std::map<std::string, Entry> entries_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam update applied to every parameter in the store.
// Every parameter needs a gradient of matching shape: a missing name throws
// std::invalid_argument rather than silently skipping the parameter.
void adam_step(ParameterStore& store, const Gradients& grads,
               const AdamConfig& config);

}  // namespace medres
