#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "medres/entitygraph/dataset.h"

namespace medres::ingest {

// Minimum row count for every entity in one schema slot.
struct MinCount {
  bool user_side = true;
  std::size_t slot = 0;  // position in the side's type list
  std::size_t min = 20;
};

// Repeatedly drops rows whose entity in any constrained slot has fewer than
// its minimum rows, until nothing changes. The result is the largest subset
// meeting every threshold at once, so it does not depend on the order in
// which the thresholds are checked.
Dataset filter_min_examples(const Dataset& data, const std::vector<MinCount>& thresholds);

// Drops rows of `data` holding an entity (any slot, either side) that never
// appears in the same slot of `reference`.
Dataset drop_unseen(const Dataset& data, const Dataset& reference);

// Keeps each row independently with probability `rate` (seeded).
Dataset sample_rows(const Dataset& data, double rate, std::uint64_t seed);

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct DataSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

// Shuffles each user's rows (seeded) and cuts them by the fractions, so
// every user appears in each split in proportion. Row order within a split
// follows the original dataset order.
DataSplits split_by_user(const Dataset& data, SplitFractions fractions, std::uint64_t seed);

}  // namespace medres::ingest
