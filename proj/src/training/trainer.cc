#include "medres/training/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "medres/diffcore/random.h"
#include "medres/errors.h"

namespace medres {

void TrainConfig::check() const {
  if (k == 0) throw ConfigError("k must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (initial_epochs == 0 || inner_epochs == 0) {
    throw ConfigError("epoch counts must be positive");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be non-negative");
}

std::vector<std::size_t> select_top(std::span<const double> scores,
                                    std::span<const int> labels, std::size_t count,
                                    int label) {
  return metrics::top_with_label(scores, labels, label, count);
}

Pool build_pool(const std::vector<UserGroup>& groups, std::span<const double> scores,
                std::span<const int> labels, std::size_t k) {
  if (groups.empty()) throw DataError("cannot build a pool from an empty dataset");
  Pool pool;
  for (const auto& g : groups) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t r : g.rows) {
      s.push_back(scores[r]);
      y.push_back(labels[r]);
    }
    const std::size_t n_pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    const auto pos = select_top(s, y, std::min(n_pos, k), 1);
    const auto neg = select_top(s, y, k, 0);
    for (std::size_t i : pos) pool.rows.push_back(g.rows[i]);
    for (std::size_t i : neg) pool.rows.push_back(g.rows[i]);
    pool.users.push_back({g.key, pos.size(), neg.size()});
  }
  return pool;
}

Pool build_pool(const MedresModel& model, const ParameterStore& store,
                const Dataset& data, std::size_t k) {
  const auto scores = model.batch_score(store, data);
  const auto labels = data.labels();
  return build_pool(data.group_by_user(), scores, labels, k);
}

Var regularized_objective(Tape& tape, const MedresModel& model,
                          const ParameterStore& store, const Dataset& data,
                          const std::vector<std::size_t>& rows, double l2,
                          bool decay_all) {
  if (rows.empty()) throw DataError("objective on an empty batch");
  const Var pred = model.score_rows(tape, store, data, rows);
  std::vector<double> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) y.push_back(data[r].label);
  Var loss = ops::bce(pred, Tensor(rows.size(), 1, std::move(y)));
  if (l2 > 0.0) {
    for (const auto& [name, entry] : store.entries()) {
      if (!entry.decay && !decay_all) continue;
      loss = ops::add(loss, ops::scale(ops::sum_squares(tape.parameter(store, name)), l2));
    }
  }
  return loss;
}

std::vector<metrics::RankingInstance> user_instances(const Dataset& data,
                                                     std::span<const double> scores,
                                                     std::size_t k,
                                                     std::vector<std::string>* keys) {
  std::vector<metrics::RankingInstance> out;
  for (const auto& g : data.group_by_user()) {
    metrics::RankingInstance inst;
    inst.k = k;
    for (std::size_t r : g.rows) {
      inst.scores.push_back(scores[r]);
      inst.labels.push_back(data[r].label);
    }
    out.push_back(std::move(inst));
    if (keys) keys->push_back(g.key);
  }
  return out;
}

std::optional<double> micro_papk_of(const MedresModel& model, const ParameterStore& store,
                                    const Dataset& data, std::size_t k) {
  if (data.empty()) return std::nullopt;
  const auto scores = model.batch_score(store, data);
  return metrics::micro_papk(user_instances(data, scores, k));
}

namespace {

// Runs `epochs` passes over `rows` in seeded shuffled minibatches and
// returns the mean batch objective.
double train_rows(const MedresModel& model, ParameterStore& store, const Dataset& data,
                  std::vector<std::size_t> rows, std::size_t epochs,
                  const TrainConfig& cfg, Rng& rng) {
  const AdamConfig adam{cfg.learning_rate};
  double total = 0.0;
  std::size_t batches = 0;
  for (std::size_t e = 0; e < epochs; ++e) {
    rng.shuffle(rows);
    for (std::size_t begin = 0; begin < rows.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(rows.size(), begin + cfg.batch_size);
      const std::vector<std::size_t> batch(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                           rows.begin() + static_cast<std::ptrdiff_t>(end));
      double value = 0.0;
      try {
        Tape tape;
        const Var loss =
            regularized_objective(tape, model, store, data, batch, cfg.l2, cfg.decay_all);
        value = loss.value().item();
        if (!std::isfinite(value)) throw NonFiniteError("loss");
        adam_step(store, tape.backward(loss, &store), adam);
      } catch (const NonFiniteError& err) {
        throw DivergenceError("non-finite value at epoch " + std::to_string(e) +
                              ", batch " + std::to_string(batches) + ": " + err.what());
      }
      total += value;
      ++batches;
    }
  }
  return batches ? total / static_cast<double>(batches) : 0.0;
}

}  // namespace

FitResult fit(const MedresModel& model, ParameterStore params, const Dataset& train,
              const Dataset* val, const TrainConfig& cfg, const FitProgress& progress) {
  cfg.check();
  if (train.empty()) throw DataError("empty training set");
  // Separate stream from parameter initialisation, which uses cfg.seed.
  Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  const auto groups = train.group_by_user();
  const auto labels = train.labels();
  const auto start = std::chrono::steady_clock::now();

  FitResult result;
  std::optional<double> best_value;
  std::size_t since_best = 0;
  std::vector<std::size_t> all_rows(train.size());
  for (std::size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = i;

  for (std::size_t it = 0; it <= cfg.outer_iterations; ++it) {
    HistoryRow row;
    row.iteration = it;
    if (it == 0) {
      row.loss = train_rows(model, params, train, all_rows, cfg.initial_epochs, cfg, rng);
    } else {
      const auto scores = model.batch_score(params, train);
      const Pool pool = build_pool(groups, scores, labels, cfg.k);
      row.loss = train_rows(model, params, train, pool.rows, cfg.inner_epochs, cfg, rng);
    }
    row.train_micro_papk = micro_papk_of(model, params, train, cfg.k);
    if (val) row.val_micro_papk = micro_papk_of(model, params, *val, cfg.k);
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.push_back(row);
    if (progress) progress(row);

    const auto value = val ? row.val_micro_papk : row.train_micro_papk;
    const double v = value.value_or(-1.0);
    if (!best_value || v > *best_value) {
      best_value = v;
      result.best = params;
      result.best_iteration = it;
      since_best = 0;
    } else if (cfg.patience > 0 && ++since_best >= cfg.patience) {
      result.stopped_early = it < cfg.outer_iterations;
      break;
    }
  }
  return result;
}

void write_history_csv(const std::vector<HistoryRow>& history, std::ostream& out) {
  out << "iteration,train_micro_papk,val_micro_papk,loss,wall_time_s\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : history) {
    out << r.iteration << ',' << (r.train_micro_papk ? num(*r.train_micro_papk) : "")
        << ',' << (r.val_micro_papk ? num(*r.val_micro_papk) : "") << ',' << num(r.loss)
        << ',';
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_time_s);
    out << buf << '\n';
  }
}

}  // namespace medres
