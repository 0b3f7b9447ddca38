#include "medres/diffcore/parameter_store.h"

#include <cmath>
#include <stdexcept>

#include "medres/errors.h"

namespace medres {

void ParameterStore::add(const std::string& name, Tensor init, bool decay) {
  if (entries_.count(name) != 0) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  Entry e;
  e.first_moment = Tensor::zeros(init.rows(), init.cols());
  e.second_moment = Tensor::zeros(init.rows(), init.cols());
  e.value = std::move(init);
  e.decay = decay;
  entries_.emplace(name, std::move(e));
}

bool ParameterStore::contains(const std::string& name) const {
  return entries_.count(name) != 0;
}

const ParameterStore::Entry& ParameterStore::entry(
    const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::invalid_argument("unknown parameter: " + name);
  }
  return it->second;
}

ParameterStore::Entry& ParameterStore::mutable_entry(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) {
    throw std::invalid_argument("unknown parameter: " + name);
  }
  return it->second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  return entry(name).value;
}

void ParameterStore::set(const std::string& name, Tensor value) {
  Entry& e = mutable_entry(name);
  if (!e.value.same_shape(value)) {
    throw DimensionError("parameter " + name + " expects " +
                         e.value.shape_string() + ", got " +
                         value.shape_string());
  }
  e.value = std::move(value);
}

void ParameterStore::set_state(const std::string& name, Tensor first,
                               Tensor second, std::int64_t step) {
  Entry& e = mutable_entry(name);
  if (!e.value.same_shape(first) || !e.value.same_shape(second)) {
    throw DimensionError("optimizer state shape mismatch for " + name);
  }
  e.first_moment = std::move(first);
  e.second_moment = std::move(second);
  e.step = step;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, _] : entries_) out.push_back(name);
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, e] : entries_) n += e.value.size();
  return n;
}

double ParameterStore::squared_norm(bool decayed_only) const {
  double total = 0.0;
  for (const auto& [_, e] : entries_) {
    if (decayed_only && !e.decay) continue;
    for (double v : e.value.data()) total += v * v;
  }
  return total;
}

void adam_step(ParameterStore& store, const Gradients& grads,
               const AdamConfig& config) {
  for (const auto& name : store.names()) {
    if (grads.count(name) == 0) {
      throw std::invalid_argument("adam_step: missing gradient for " + name);
    }
    if (!grads.at(name).same_shape(store.get(name))) {
      throw DimensionError("adam_step: gradient shape mismatch for " + name);
    }
  }
  for (const auto& name : store.names()) {
    const auto& e = store.entry(name);
    const Tensor& g = grads.at(name);
    const std::int64_t step = e.step + 1;
    const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
    const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));

    const std::size_t n = g.size();
    std::vector<double> m(n), v(n), theta(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double gi = g.data()[i];
      m[i] = config.beta1 * e.first_moment.data()[i] + (1.0 - config.beta1) * gi;
      v[i] = config.beta2 * e.second_moment.data()[i] +
             (1.0 - config.beta2) * gi * gi;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      theta[i] = e.value.data()[i] -
                 config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
    const std::size_t r = g.rows(), c = g.cols();
    store.set(name, Tensor(r, c, std::move(theta)));
    store.set_state(name, Tensor(r, c, std::move(m)), Tensor(r, c, std::move(v)),
                    step);
  }
}

}  // namespace medres
