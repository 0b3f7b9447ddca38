#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

// Ranking metrics over one user's scored candidates. Functions that are
// undefined on a user without positives or without negatives return
// std::nullopt rather than a made-up value.
//
// Tie policy, used everywhere: a positive scored equal to a negative counts
// as correctly ordered (the pair indicator is s+ >= s-), and top-n selection
// breaks equal scores by the smaller original index.
namespace medres::metrics {

struct RankingInstance {
  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t k = 1;

  // Throws std::invalid_argument on ragged input, k = 0, or a label outside
  // {0, 1}.
  void check() const;
  std::size_t positives() const;
  std::size_t negatives() const;
  // min(n+, k)
  std::size_t beta() const;
  bool degenerate() const { return positives() == 0 || negatives() == 0; }
};

// Literal divides the pair count by beta * k even when fewer than k
// negatives exist; Normalized uses beta * min(k, n-).
enum class Denominator { kLiteral, kNormalized };

// Indices of the `count` highest-scoring points carrying `label`, best
// first, ties by smaller index. Fewer are returned when unavailable.
std::vector<std::size_t> top_with_label(std::span<const double> scores,
                                        std::span<const int> labels, int label,
                                        std::size_t count);

struct PairTally {
  std::size_t wins = 0;      // ordered pairs with s+ >= s-
  std::size_t beta = 0;      // positives taking part
  std::size_t negatives = 0; // negatives taking part
};

// Pairs between the top-beta positives and the top-k negatives.
std::optional<PairTally> papk_tally(const RankingInstance& inst);

std::optional<double> papk_user(const RankingInstance& inst,
                                Denominator d = Denominator::kLiteral);

// Independent O(n^2) evaluation of the same definition, for testing.
std::optional<double> brute_force_papk(const RankingInstance& inst,
                                       Denominator d = Denominator::kLiteral);

// Unweighted mean of papk_user over the non-degenerate users.
std::optional<double> micro_papk(std::span<const RankingInstance> users,
                                 Denominator d = Denominator::kLiteral);

// Pooled wins over pooled pairs: sum(wins) / (k * sum(beta)), or
// sum(wins) / sum(beta * min(k, n-)) when normalized. Every instance must
// share k.
std::optional<double> macro_papk(std::span<const RankingInstance> users,
                                 Denominator d = Denominator::kLiteral);

// All positives against the top-j negatives, divided by n+ * j (or
// n+ * min(j, n-) when normalized).
std::optional<double> pauc(const RankingInstance& inst, std::size_t j,
                           Denominator d = Denominator::kLiteral);

// Positives among the top k points overall, over k.
std::optional<double> prec_at_k(const RankingInstance& inst);

// Fraction of correctly ordered (positive, negative) pairs, ties count 1/2.
std::optional<double> auc(const RankingInstance& inst);

}  // namespace medres::metrics
