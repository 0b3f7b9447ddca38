#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "medres/metrics/ranking.h"

namespace medres::metrics {

inline constexpr const char* kTiePolicy = "ge-wins/smallest-index";

struct UserRow {
  std::string key;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t beta = 0;
  std::optional<double> value;  // pAp@k, empty when skipped
  bool skipped() const { return !value.has_value(); }
};

// Every metric of the family at one k. Undefined aggregates (all users
// degenerate) stay empty.
struct MetricReport {
  std::size_t k = 0;
  std::string tie_policy = kTiePolicy;
  // Denominator used for the per-user values.
  Denominator denominator = Denominator::kLiteral;
  std::size_t users = 0;
  std::size_t skipped = 0;
  std::optional<double> micro_papk;
  std::optional<double> macro_papk;
  std::optional<double> micro_papk_normalized;
  std::optional<double> macro_papk_normalized;
  // Means over non-degenerate users of pAUC at j = k, prec@k and AUC.
  std::optional<double> pauc;
  std::optional<double> prec_at_k;
  std::optional<double> auc;
  std::vector<UserRow> per_user;
};

// `keys[i]` names `users[i]`; every instance must carry `k`. Aggregates
// are reported under both denominators; `per_user_denominator` picks the
// one used for the per-user rows.
MetricReport evaluate(const std::vector<std::string>& keys,
                      const std::vector<RankingInstance>& users,
                      Denominator per_user_denominator = Denominator::kLiteral);

std::string report_json(const MetricReport& report);
// Header: user_key,n_pos,n_neg,beta,value,skipped
void write_per_user_csv(const MetricReport& report, std::ostream& out);

}  // namespace medres::metrics
