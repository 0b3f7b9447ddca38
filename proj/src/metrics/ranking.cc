#include "medres/metrics/ranking.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace medres::metrics {

void RankingInstance::check() const {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("ranking instance has " +
                                std::to_string(scores.size()) + " scores and " +
                                std::to_string(labels.size()) + " labels");
  }
  if (k == 0) throw std::invalid_argument("k must be positive");
  for (int y : labels) {
    if (y != 0 && y != 1) {
      throw std::invalid_argument("label not in {0,1}: " + std::to_string(y));
    }
  }
}

std::size_t RankingInstance::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

std::size_t RankingInstance::negatives() const { return labels.size() - positives(); }

std::size_t RankingInstance::beta() const { return std::min(positives(), k); }

std::vector<std::size_t> top_with_label(std::span<const double> scores,
                                        std::span<const int> labels, int label,
                                        std::size_t count) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) idx.push_back(i);
  }
  const std::size_t take = std::min(count, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take),
                    idx.end(), [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  idx.resize(take);
  return idx;
}

namespace {

std::size_t count_wins(std::span<const double> scores,
                       const std::vector<std::size_t>& pos,
                       const std::vector<std::size_t>& neg) {
  std::size_t wins = 0;
  for (std::size_t i : pos) {
    for (std::size_t j : neg) {
      if (scores[i] >= scores[j]) ++wins;
    }
  }
  return wins;
}

double ratio(std::size_t wins, std::size_t a, std::size_t b) {
  return static_cast<double>(wins) / (static_cast<double>(a) * static_cast<double>(b));
}

}  // namespace

std::optional<PairTally> papk_tally(const RankingInstance& inst) {
  inst.check();
  if (inst.degenerate()) return std::nullopt;
  const auto pos = top_with_label(inst.scores, inst.labels, 1, inst.beta());
  const auto neg = top_with_label(inst.scores, inst.labels, 0, inst.k);
  return PairTally{count_wins(inst.scores, pos, neg), pos.size(), neg.size()};
}

std::optional<double> papk_user(const RankingInstance& inst, Denominator d) {
  const auto t = papk_tally(inst);
  if (!t) return std::nullopt;
  const std::size_t denom_k = d == Denominator::kLiteral ? inst.k : t->negatives;
  return ratio(t->wins, t->beta, denom_k);
}

std::optional<double> brute_force_papk(const RankingInstance& inst, Denominator d) {
  inst.check();
  const std::size_t n = inst.scores.size();
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : inst.labels) (y == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const std::size_t beta = std::min(n_pos, inst.k);
  // A point is selected when fewer than `quota` same-label points beat it,
  // where beating means a higher score or an equal score at a smaller index.
  auto selected = [&](std::size_t i, std::size_t quota) {
    std::size_t ahead = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || inst.labels[j] != inst.labels[i]) continue;
      if (inst.scores[j] > inst.scores[i] ||
          (inst.scores[j] == inst.scores[i] && j < i)) {
        ++ahead;
      }
    }
    return ahead < quota;
  };
  std::size_t wins = 0, used_neg = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (inst.labels[j] == 0 && selected(j, inst.k)) ++used_neg;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (inst.labels[i] != 1 || !selected(i, beta)) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (inst.labels[j] != 0 || !selected(j, inst.k)) continue;
      if (!(inst.scores[i] < inst.scores[j])) ++wins;
    }
  }
  const std::size_t denom_k = d == Denominator::kLiteral ? inst.k : used_neg;
  return ratio(wins, beta, denom_k);
}

std::optional<double> micro_papk(std::span<const RankingInstance> users, Denominator d) {
  double total = 0.0;
  std::size_t counted = 0;
  for (const auto& u : users) {
    if (const auto v = papk_user(u, d)) {
      total += *v;
      ++counted;
    }
  }
  if (counted == 0) return std::nullopt;
  return total / static_cast<double>(counted);
}

std::optional<double> macro_papk(std::span<const RankingInstance> users, Denominator d) {
  std::size_t wins = 0, pairs = 0;
  for (const auto& u : users) {
    if (u.k != users.front().k) {
      throw std::invalid_argument("macro_papk needs a common k");
    }
    const auto t = papk_tally(u);
    if (!t) continue;
    wins += t->wins;
    pairs += t->beta * (d == Denominator::kLiteral ? u.k : t->negatives);
  }
  if (pairs == 0) return std::nullopt;
  return static_cast<double>(wins) / static_cast<double>(pairs);
}

std::optional<double> pauc(const RankingInstance& inst, std::size_t j, Denominator d) {
  inst.check();
  if (j == 0) throw std::invalid_argument("pauc needs j >= 1");
  if (inst.degenerate()) return std::nullopt;
  const std::size_t n_pos = inst.positives();
  const auto pos = top_with_label(inst.scores, inst.labels, 1, n_pos);
  const auto neg = top_with_label(inst.scores, inst.labels, 0, j);
  const std::size_t denom_j = d == Denominator::kLiteral ? j : neg.size();
  return ratio(count_wins(inst.scores, pos, neg), pos.size(), denom_j);
}

std::optional<double> prec_at_k(const RankingInstance& inst) {
  inst.check();
  if (inst.degenerate()) return std::nullopt;
  std::vector<std::size_t> idx(inst.scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(inst.k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take),
                    idx.end(), [&](std::size_t a, std::size_t b) {
                      if (inst.scores[a] != inst.scores[b]) {
                        return inst.scores[a] > inst.scores[b];
                      }
                      return a < b;
                    });
  std::size_t hits = 0;
  for (std::size_t r = 0; r < take; ++r) hits += inst.labels[idx[r]] == 1;
  return static_cast<double>(hits) / static_cast<double>(inst.k);
}

std::optional<double> auc(const RankingInstance& inst) {
  inst.check();
  if (inst.degenerate()) return std::nullopt;
  // Sort once and sweep: for each tie group of scores, positives beat every
  // negative strictly below and half of the negatives inside the group.
  std::vector<std::size_t> idx(inst.scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return inst.scores[a] < inst.scores[b]; });
  double correct = 0.0;
  std::size_t neg_below = 0;
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s, pos = 0, neg = 0;
    while (e < idx.size() && inst.scores[idx[e]] == inst.scores[idx[s]]) {
      (inst.labels[idx[e]] == 1 ? pos : neg)++;
      ++e;
    }
    correct += static_cast<double>(pos) *
               (static_cast<double>(neg_below) + 0.5 * static_cast<double>(neg));
    neg_below += neg;
    s = e;
  }
  return correct / (static_cast<double>(inst.positives()) *
                    static_cast<double>(inst.negatives()));
}

}  // namespace medres::metrics
