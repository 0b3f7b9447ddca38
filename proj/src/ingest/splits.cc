#include "medres/ingest/splits.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "medres/diffcore/random.h"
#include "medres/errors.h"

namespace medres::ingest {

namespace {

std::size_t entity_at(const LabeledExample& ex, const MinCount& c) {
  return c.user_side ? ex.user_entities.at(c.slot) : ex.item_entities.at(c.slot);
}

}  // namespace

Dataset filter_min_examples(const Dataset& data, const std::vector<MinCount>& thresholds) {
  std::vector<bool> alive(data.size(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& c : thresholds) {
      std::map<std::size_t, std::size_t> counts;
      for (std::size_t r = 0; r < data.size(); ++r) {
        if (alive[r]) ++counts[entity_at(data[r], c)];
      }
      for (std::size_t r = 0; r < data.size(); ++r) {
        if (alive[r] && counts[entity_at(data[r], c)] < c.min) {
          alive[r] = false;
          changed = true;
        }
      }
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (alive[r]) keep.push_back(r);
  }
  return data.subset(keep);
}

Dataset drop_unseen(const Dataset& data, const Dataset& reference) {
  const auto& s = data.schema();
  std::vector<std::set<std::size_t>> users(s.user_types.size()), items(s.item_types.size());
  for (const auto& ex : reference.examples()) {
    for (std::size_t i = 0; i < users.size(); ++i) users[i].insert(ex.user_entities.at(i));
    for (std::size_t i = 0; i < items.size(); ++i) items[i].insert(ex.item_entities.at(i));
  }
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < data.size(); ++r) {
    bool seen = true;
    for (std::size_t i = 0; i < users.size() && seen; ++i) {
      seen = users[i].count(data[r].user_entities[i]) > 0;
    }
    for (std::size_t i = 0; i < items.size() && seen; ++i) {
      seen = items[i].count(data[r].item_entities[i]) > 0;
    }
    if (seen) keep.push_back(r);
  }
  return data.subset(keep);
}

Dataset sample_rows(const Dataset& data, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("sample rate must be in [0,1]");
  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (rng.uniform() < rate) keep.push_back(r);
  }
  return data.subset(keep);
}

DataSplits split_by_user(const Dataset& data, SplitFractions f, std::uint64_t seed) {
  if (f.train < 0 || f.val < 0 || f.test < 0 ||
      std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  Rng rng(seed);
  std::vector<int> which(data.size(), 0);
  for (const auto& g : data.group_by_user()) {
    std::vector<std::size_t> rows = g.rows;
    rng.shuffle(rows);
    const double n = static_cast<double>(rows.size());
    const auto n_train = static_cast<std::size_t>(std::llround(f.train * n));
    const auto n_val = std::min(rows.size() - std::min(rows.size(), n_train),
                                static_cast<std::size_t>(std::llround(f.val * n)));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      which[rows[i]] = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
    }
  }
  std::vector<std::size_t> parts[3];
  for (std::size_t r = 0; r < data.size(); ++r) parts[which[r]].push_back(r);
  return {data.subset(parts[0]), data.subset(parts[1]), data.subset(parts[2])};
}

}  // namespace medres::ingest
