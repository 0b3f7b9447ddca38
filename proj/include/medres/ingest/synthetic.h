#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "medres/entitygraph/dataset.h"

namespace medres::ingest {

// Planted-preference generator. Users and items get latent clusters;
// labels depend only on whether the two clusters agree. The user-item
// graphs are drawn independently of the labels but are denser inside a
// cluster, so they carry the cluster structure without leaking labels.
struct SyntheticConfig {
  std::size_t users = 200;
  std::size_t items = 50;
  std::size_t clusters = 2;
  std::size_t graphs = 2;
  double positive_same = 0.9;
  double positive_cross = 0.05;
  double edge_same = 0.15;
  double edge_cross = 0.08;
  std::size_t max_weight = 3;  // edge weights uniform in 1..max_weight
  // Fraction of the user x item grid that receives a label.
  double pair_rate = 1.0;
  std::size_t user_dim = 4;
  std::size_t item_dim = 4;
  double vector_noise = 1.0;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  GraphSet graphs;
  Dataset data;
  std::vector<std::size_t> user_cluster;
  std::vector<std::size_t> item_cluster;
};

// Entity types "user" (0) and "item" (1); graphs "interaction_<g>" from
// user to item. Rows are emitted user-major, items ascending.
SyntheticData synthesize(const SyntheticConfig& config);

}  // namespace medres::ingest
