#include "medres/metrics/report.h"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace medres::metrics {

namespace {

std::optional<double> mean_defined(const std::vector<std::optional<double>>& xs) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& x : xs) {
    if (x) {
      total += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return total / static_cast<double>(n);
}

nlohmann::json value_or_null(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

MetricReport evaluate(const std::vector<std::string>& keys,
                      const std::vector<RankingInstance>& users,
                      Denominator per_user_denominator) {
  if (keys.size() != users.size()) {
    throw std::invalid_argument("one key per ranking instance required");
  }
  if (users.empty()) throw std::invalid_argument("no users to evaluate");
  MetricReport r;
  r.k = users.front().k;
  r.denominator = per_user_denominator;
  r.users = users.size();
  std::vector<std::optional<double>> paucs, precs, aucs;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const auto& u = users[i];
    UserRow row{keys[i], u.positives(), u.negatives(), u.beta(),
                papk_user(u, per_user_denominator)};
    if (row.skipped()) ++r.skipped;
    r.per_user.push_back(std::move(row));
    paucs.push_back(pauc(u, u.k));
    precs.push_back(prec_at_k(u));
    aucs.push_back(auc(u));
  }
  r.micro_papk = micro_papk(users);
  r.macro_papk = macro_papk(users);
  r.micro_papk_normalized = micro_papk(users, Denominator::kNormalized);
  r.macro_papk_normalized = macro_papk(users, Denominator::kNormalized);
  r.pauc = mean_defined(paucs);
  r.prec_at_k = mean_defined(precs);
  r.auc = mean_defined(aucs);
  return r;
}

std::string report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["k"] = r.k;
  j["tie_policy"] = r.tie_policy;
  j["users"] = r.users;
  j["skipped_users"] = r.skipped;
  j["per_user_denominator"] =
      r.denominator == Denominator::kLiteral ? "literal" : "normalized";
  j["micro_papk"] = value_or_null(r.micro_papk);
  j["macro_papk"] = value_or_null(r.macro_papk);
  j["micro_papk_normalized"] = value_or_null(r.micro_papk_normalized);
  j["macro_papk_normalized"] = value_or_null(r.macro_papk_normalized);
  j["pauc"] = value_or_null(r.pauc);
  j["prec_at_k"] = value_or_null(r.prec_at_k);
  j["auc"] = value_or_null(r.auc);
  return j.dump(2) + "\n";
}

void write_per_user_csv(const MetricReport& r, std::ostream& out) {
  out << "user_key,n_pos,n_neg,beta,value,skipped\n";
  char buf[32];
  for (const auto& row : r.per_user) {
    out << csv_field(row.key) << ',' << row.n_pos << ',' << row.n_neg << ','
        << row.beta << ',';
    if (row.value) {
      std::snprintf(buf, sizeof buf, "%.17g", *row.value);
      out << buf;
    }
    out << ',' << (row.skipped() ? 1 : 0) << '\n';
  }
}

}  // namespace medres::metrics
