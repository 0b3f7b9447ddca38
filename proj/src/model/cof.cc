#include "medres/model/cof.h"

#include <cmath>

#include "medres/diffcore/ops.h"
#include "medres/errors.h"

namespace medres {

CofScorer::CofScorer(const GraphSet& graphs, DatasetSchema schema)
    : graphs_(&graphs), schema_(std::move(schema)) {}

std::vector<double> CofScorer::standardized(const LabeledExample& ex) const {
  auto f = one_hop_features(*graphs_, schema_, ex);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = (f[i] - mean_[i]) / scale_[i];
  return f;
}

void CofScorer::fit(const Dataset& train, const CofConfig& config) {
  if (train.empty()) throw DataError("cannot fit on an empty dataset");
  const std::size_t d = one_hop_feature_names(*graphs_, schema_).size();
  const std::size_t n = train.size();
  mean_.assign(d, 0.0);
  scale_.assign(d, 0.0);
  std::vector<std::vector<double>> raw;
  raw.reserve(n);
  for (const auto& ex : train.examples()) {
    raw.push_back(one_hop_features(*graphs_, schema_, ex));
    for (std::size_t i = 0; i < d; ++i) mean_[i] += raw.back()[i];
  }
  for (double& m : mean_) m /= static_cast<double>(n);
  for (const auto& r : raw) {
    for (std::size_t i = 0; i < d; ++i) scale_[i] += (r[i] - mean_[i]) * (r[i] - mean_[i]);
  }
  for (double& s : scale_) {
    s = std::sqrt(s / static_cast<double>(n));
    if (s < 1e-12) s = 1.0;
  }
  std::vector<double> x;
  x.reserve(n * d);
  std::vector<double> y;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < d; ++i) x.push_back((raw[r][i] - mean_[i]) / scale_[i]);
    y.push_back(train[r].label);
  }
  const Tensor features(n, d, std::move(x));
  const Tensor labels(n, 1, std::move(y));

  ParameterStore store;
  store.add("w", Tensor::zeros(d, 1));
  store.add("b", Tensor::zeros(1, 1), false);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    Tape tape;
    const Var w = tape.parameter(store, "w");
    const Var p = ops::sigmoid(
        ops::add(ops::matmul(tape.constant(features), w), tape.parameter(store, "b")));
    Var loss = ops::bce(p, labels);
    if (config.l2 > 0.0) loss = ops::add(loss, ops::scale(ops::sum_squares(w), config.l2));
    adam_step(store, tape.backward(loss, &store), {config.learning_rate});
  }
  const auto wd = store.get("w").data();
  weights_.assign(wd.begin(), wd.end());
  bias_ = store.get("b").item();
}

std::vector<double> CofScorer::score(const Dataset& data) const {
  if (mean_.empty()) throw std::logic_error("scorer not fitted");
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& ex : data.examples()) {
    const auto f = standardized(ex);
    double z = bias_;
    for (std::size_t i = 0; i < f.size(); ++i) z += weights_[i] * f[i];
    out.push_back(1.0 / (1.0 + std::exp(-z)));
  }
  return out;
}

}  // namespace medres
