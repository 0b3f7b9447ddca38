#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "medres/entitygraph/dataset.h"

namespace medres {

struct CofConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.05;
  double l2 = 1e-4;
};

// Content-filtering baseline: logistic regression over one_hop_features,
// standardised with the training mean and deviation, fit by full-batch
// Adam on mean cross-entropy.
class CofScorer {
 public:
  CofScorer(const GraphSet& graphs, DatasetSchema schema);

  void fit(const Dataset& train, const CofConfig& config);
  std::vector<double> score(const Dataset& data) const;
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  std::vector<double> standardized(const LabeledExample& ex) const;

  const GraphSet* graphs_;
  DatasetSchema schema_;
  std::vector<double> mean_;
  std::vector<double> scale_;
  std::vector<double> weights_;
  double bias_ = 0.0;
};

}  // namespace medres
