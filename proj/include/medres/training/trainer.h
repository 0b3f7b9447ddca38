#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "medres/metrics/ranking.h"
#include "medres/model/medres_model.h"

namespace medres {

struct TrainConfig {
  std::size_t k = 10;
  // Pool-refit iterations after the initial full-data fit.
  std::size_t outer_iterations = 5;
  std::size_t initial_epochs = 3;
  std::size_t inner_epochs = 3;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  // L2 coefficient on the weight matrices.
  double l2 = 1e-5;
  // Apply the L2 penalty to every parameter, biases and free tables included.
  bool decay_all = false;
  std::uint64_t seed = 0;
  // Stop after this many iterations without a better validation value;
  // 0 disables early stopping.
  std::size_t patience = 0;

  // Throws ConfigError when a count is zero or l2 is negative.
  void check() const;
};

// Indices of the `count` highest-scoring points with `label` (1 or 0),
// best first, ties by smaller index.
std::vector<std::size_t> select_top(std::span<const double> scores,
                                    std::span<const int> labels,
                                    std::size_t count, int label);

struct PoolUser {
  std::string key;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

struct Pool {
  std::vector<std::size_t> rows;  // dataset rows, user by user
  std::vector<PoolUser> users;
};

// Per user: the top min(n+, k) positives and the top min(n-, k) negatives
// under `scores`. A user without positives contributes negatives only.
Pool build_pool(const std::vector<UserGroup>& groups, std::span<const double> scores,
                std::span<const int> labels, std::size_t k);
Pool build_pool(const MedresModel& model, const ParameterStore& store,
                const Dataset& data, std::size_t k);

// Mean BCE on `rows` plus l2 * (sum of squares of the decayed parameters).
Var regularized_objective(Tape& tape, const MedresModel& model,
                          const ParameterStore& store, const Dataset& data,
                          const std::vector<std::size_t>& rows, double l2,
                          bool decay_all = false);

// One ranking instance per user key, in first-appearance order.
std::vector<metrics::RankingInstance> user_instances(const Dataset& data,
                                                     std::span<const double> scores,
                                                     std::size_t k,
                                                     std::vector<std::string>* keys = nullptr);
std::optional<double> micro_papk_of(const MedresModel& model, const ParameterStore& store,
                                    const Dataset& data, std::size_t k);

struct HistoryRow {
  std::size_t iteration = 0;
  std::optional<double> train_micro_papk;
  std::optional<double> val_micro_papk;
  double loss = 0.0;  // mean objective over the iteration's minibatches
  double wall_time_s = 0.0;
};

struct FitResult {
  ParameterStore best;
  std::size_t best_iteration = 0;
  std::vector<HistoryRow> history;
  bool stopped_early = false;
};

using FitProgress = std::function<void(const HistoryRow&)>;

// Iteration 0 fits the whole training set; every later iteration scores
// the training set, rebuilds the pool and refits from the current
// parameters. Returns the parameters of the iteration with the best
// validation micro-pAp@k (training value when no validation set is
// given; ties go to the earlier iteration). Throws DivergenceError on a
// non-finite loss.
FitResult fit(const MedresModel& model, ParameterStore params, const Dataset& train,
              const Dataset* val, const TrainConfig& config,
              const FitProgress& progress = {});

// Header: iteration,train_micro_papk,val_micro_papk,loss,wall_time_s
void write_history_csv(const std::vector<HistoryRow>& history, std::ostream& out);

}  // namespace medres
