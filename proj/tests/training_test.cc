#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "medres/diffcore/random.h"
#include "medres/errors.h"
#include "medres/ingest/splits.h"
#include "medres/ingest/synthetic.h"
#include "medres/training/trainer.h"
#include "support/toy.h"

namespace medres {
namespace {

using testing::make_toy_world;
using testing::toy_config;

// Independent reference: stable sort by score descending, keep `label`.
std::vector<std::size_t> sorted_top(const std::vector<double>& s, const std::vector<int>& y,
                                    std::size_t count, int label) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  std::vector<std::size_t> out;
  for (std::size_t i : idx) {
    if (out.size() == count) break;
    if (y[i] == label) out.push_back(i);
  }
  return out;
}

TrainConfig small_train(std::uint64_t seed = 1) {
  TrainConfig c;
  c.k = 3;
  c.outer_iterations = 3;
  c.initial_epochs = 2;
  c.inner_epochs = 2;
  c.batch_size = 8;
  c.learning_rate = 1e-2;
  c.seed = seed;
  return c;
}

TEST(SelectTopTest, Examples) {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  const std::vector<int> y{1, 0, 1, 0};
  EXPECT_TRUE(select_top(s, y, 0, 1).empty());
  EXPECT_EQ(select_top(s, y, 1, 1), (std::vector<std::size_t>{0}));
  EXPECT_EQ(select_top(s, y, 2, 0), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(select_top(s, y, 5, 1), (std::vector<std::size_t>{0, 2}));
}

TEST(SelectTopTest, TiesGoToSmallerIndex) {
  const std::vector<double> s{0.5, 0.5, 0.5};
  const std::vector<int> y{0, 0, 0};
  EXPECT_EQ(select_top(s, y, 2, 0), (std::vector<std::size_t>{0, 1}));
}

TEST(PoolTest, SizesAndMembersAgainstSortOnRandomUsers) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t users = 1 + rng.below(4);
    const std::size_t k = 1 + rng.below(6);
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<UserGroup> groups;
    for (std::size_t u = 0; u < users; ++u) {
      UserGroup g{"u" + std::to_string(u), {}};
      const std::size_t n = 1 + rng.below(12);
      for (std::size_t i = 0; i < n; ++i) {
        g.rows.push_back(scores.size());
        scores.push_back(std::round(rng.uniform() * 8) / 8);
        labels.push_back(rng.bernoulli(0.3) ? 1 : 0);
      }
      groups.push_back(g);
    }
    const Pool pool = build_pool(groups, scores, labels, k);
    ASSERT_EQ(pool.users.size(), users);
    std::size_t offset = 0;
    for (std::size_t u = 0; u < users; ++u) {
      std::vector<double> s;
      std::vector<int> y;
      for (std::size_t r : groups[u].rows) {
        s.push_back(scores[r]);
        y.push_back(labels[r]);
      }
      const std::size_t n_pos = std::count(y.begin(), y.end(), 1);
      const std::size_t n_neg = y.size() - n_pos;
      EXPECT_EQ(pool.users[u].positives, std::min(n_pos, k));
      EXPECT_EQ(pool.users[u].negatives, std::min(n_neg, k));
      std::vector<std::size_t> expect;
      for (std::size_t i : sorted_top(s, y, k, 1)) expect.push_back(groups[u].rows[i]);
      for (std::size_t i : sorted_top(s, y, k, 0)) expect.push_back(groups[u].rows[i]);
      const std::vector<std::size_t> got(pool.rows.begin() + offset,
                                         pool.rows.begin() + offset + expect.size());
      EXPECT_EQ(got, expect);
      offset += expect.size();
    }
    EXPECT_EQ(offset, pool.rows.size());
  }
}

TEST(PoolTest, UserWithoutPositivesContributesNegativesOnly) {
  const std::vector<UserGroup> groups{{"a", {0, 1, 2}}};
  const std::vector<double> s{0.1, 0.9, 0.5};
  const std::vector<int> y{0, 0, 0};
  const Pool pool = build_pool(groups, s, y, 2);
  EXPECT_EQ(pool.rows, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(pool.users[0].positives, 0u);
  EXPECT_THROW(build_pool({}, s, y, 2), DataError);
}

TEST(ObjectiveTest, PenaltyAddsScaledSquaredNorm) {
  const auto w = make_toy_world(4);
  const MedresModel m(w.graphs, w.data.schema(), toy_config());
  ParameterStore s;
  m.init_parameters(s, 5);
  const std::vector<std::size_t> rows{0, 3, 5};
  double decayed = 0.0, all = 0.0;
  for (const auto& [name, e] : s.entries()) {
    double sq = 0.0;
    for (double v : e.value.data()) sq += v * v;
    all += sq;
    if (e.decay) decayed += sq;
  }
  EXPECT_GT(all, decayed);
  Tape t0, t1, t2;
  const double base = regularized_objective(t0, m, s, w.data, rows, 0.0).value().item();
  const double pen = regularized_objective(t1, m, s, w.data, rows, 0.5).value().item();
  const double pen_all = regularized_objective(t2, m, s, w.data, rows, 0.5, true).value().item();
  EXPECT_NEAR(pen - base, 0.5 * decayed, 1e-12);
  EXPECT_NEAR(pen_all - base, 0.5 * all, 1e-12);

  // No penalty is plain mean cross-entropy.
  const auto scores = m.batch_score(s, w.data);
  double bce = 0.0;
  for (std::size_t r : rows) {
    const double p = scores[r];
    bce -= w.data[r].label ? std::log(p) : std::log(1 - p);
  }
  EXPECT_NEAR(base, bce / rows.size(), 1e-12);
  Tape t3;
  EXPECT_THROW(regularized_objective(t3, m, s, w.data, {}, 0.0), DataError);
}

TEST(ObjectiveTest, UnitCoefficientOnSingleWeightOfTwoAddsFour) {
  const auto w = make_toy_world(6);
  const MedresModel m(w.graphs, w.data.schema(), toy_config());
  ParameterStore s;
  m.init_parameters(s, 7);
  // Zero every decayed weight except one scalar set to 2.
  for (const auto& name : s.names()) {
    if (!s.entry(name).decay) continue;
    const Tensor& v = s.get(name);
    s.set(name, Tensor::zeros(v.rows(), v.cols()));
  }
  s.set("scorer/M3", Tensor(4, 1, {2, 0, 0, 0}));
  Tape a, b;
  const double base = regularized_objective(a, m, s, w.data, {0, 1}, 0.0).value().item();
  const double pen = regularized_objective(b, m, s, w.data, {0, 1}, 1.0).value().item();
  EXPECT_NEAR(pen - base, 4.0, 1e-12);
}

TEST(TrainConfigTest, RejectsBadValues) {
  TrainConfig c;
  EXPECT_NO_THROW(c.check());
  c.k = 0;
  EXPECT_THROW(c.check(), ConfigError);
  c = {};
  c.batch_size = 0;
  EXPECT_THROW(c.check(), ConfigError);
  c = {};
  c.inner_epochs = 0;
  EXPECT_THROW(c.check(), ConfigError);
  c = {};
  c.l2 = -1;
  EXPECT_THROW(c.check(), ConfigError);
  c = {};
  c.learning_rate = 0;
  EXPECT_THROW(c.check(), ConfigError);
}

class FitTest : public ::testing::Test {
 protected:
  FitTest() : world_(make_toy_world(8, 60)), val_(make_toy_world(8, 30).data) {}

  FitResult run(const TrainConfig& cfg) const {
    const MedresModel m(world_.graphs, world_.data.schema(), toy_config());
    ParameterStore s;
    m.init_parameters(s, cfg.seed);
    return fit(m, s, world_.data, &val_, cfg);
  }

  testing::ToyWorld world_;
  Dataset val_;
};

TEST_F(FitTest, ZeroOuterIterationsIsInitialFitOnly) {
  TrainConfig cfg = small_train();
  cfg.outer_iterations = 0;
  const auto r = run(cfg);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.best_iteration, 0u);
  EXPECT_TRUE(r.history[0].val_micro_papk.has_value());
}

TEST_F(FitTest, HistoryIsDeterministic) {
  const auto a = run(small_train(3));
  const auto b = run(small_train(3));
  ASSERT_EQ(a.history.size(), 4u);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].iteration, i);
    EXPECT_EQ(a.history[i].loss, b.history[i].loss);
    EXPECT_EQ(a.history[i].train_micro_papk, b.history[i].train_micro_papk);
    EXPECT_EQ(a.history[i].val_micro_papk, b.history[i].val_micro_papk);
  }
  for (const auto& name : a.best.names()) EXPECT_EQ(a.best.get(name), b.best.get(name));
  const auto c = run(small_train(4));
  EXPECT_NE(a.history[0].loss, c.history[0].loss);
}

TEST_F(FitTest, BestIterationIsFirstArgmaxOfValidation) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    TrainConfig cfg = small_train(seed);
    cfg.outer_iterations = 5;
    const auto r = run(cfg);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      if (*r.history[i].val_micro_papk > *r.history[arg].val_micro_papk) arg = i;
    }
    EXPECT_EQ(r.best_iteration, arg);
    const MedresModel m(world_.graphs, world_.data.schema(), toy_config());
    EXPECT_EQ(micro_papk_of(m, r.best, val_, cfg.k), r.history[arg].val_micro_papk);
  }
}

TEST_F(FitTest, PatienceStopsAfterStaleIterations) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    TrainConfig full = small_train(seed);
    full.outer_iterations = 6;
    const auto all = run(full);
    TrainConfig early = full;
    early.patience = 1;
    const auto r = run(early);
    // Expected stop: first iteration that fails to beat the running best.
    std::size_t expect = all.history.size();
    double best = *all.history[0].val_micro_papk;
    for (std::size_t i = 1; i < all.history.size(); ++i) {
      if (*all.history[i].val_micro_papk > best) {
        best = *all.history[i].val_micro_papk;
      } else {
        expect = i + 1;
        break;
      }
    }
    EXPECT_EQ(r.history.size(), expect);
    EXPECT_EQ(r.stopped_early, expect < all.history.size());
  }
}

TEST_F(FitTest, HugeStepDiverges) {
  TrainConfig cfg = small_train();
  cfg.learning_rate = 1e300;
  EXPECT_THROW(run(cfg), DivergenceError);
}

TEST_F(FitTest, EmptyTrainingSetIsDataError) {
  const MedresModel m(world_.graphs, world_.data.schema(), toy_config());
  ParameterStore s;
  m.init_parameters(s, 1);
  EXPECT_THROW(fit(m, s, Dataset(world_.data.schema()), nullptr, small_train()), DataError);
}

// Noise-free planted clusters: labels are exactly "same cluster".
struct SeparableRun {
  std::vector<HistoryRow> history;
};

SeparableRun separable_run(std::uint64_t seed) {
  ingest::SyntheticConfig sc;
  sc.users = 100;
  sc.items = 80;
  sc.positive_same = 1.0;
  sc.positive_cross = 0.0;
  sc.edge_same = 0.3;
  sc.edge_cross = 0.05;
  sc.seed = seed;
  const auto syn = ingest::synthesize(sc);
  const auto split = ingest::split_by_user(syn.data, {0.5, 0.5, 0.0}, seed + 1);
  MedresConfig mc;
  mc.conv_width = 16;
  mc.merge_width = 16;
  mc.hidden1 = 32;
  mc.hidden2 = 16;
  const MedresModel m(syn.graphs, syn.data.schema(), mc);
  ParameterStore s;
  m.init_parameters(s, seed);
  TrainConfig tc;
  tc.learning_rate = 5e-3;
  tc.seed = seed;
  return {fit(m, s, split.train, &split.val, tc).history};
}

TEST(FitSyntheticTest, SeparableSetAndTrainFitAcrossSeeds) {
  std::size_t not_worse = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto h = separable_run(seed).history;
    ASSERT_EQ(h.size(), 6u);
    double best_val = 0.0;
    for (const auto& row : h) best_val = std::max(best_val, *row.val_micro_papk);
    EXPECT_GE(best_val, 0.95) << "seed " << seed;
    if (*h.back().train_micro_papk >= *h.front().train_micro_papk) ++not_worse;
  }
  EXPECT_GE(not_worse, 3u);
}

TEST(UserInstancesTest, GroupsByKeyInFirstAppearanceOrder) {
  Dataset d(DatasetSchema{{0}, {1}, 0, 0});
  d.add({{0}, {0}, {}, {}, 1, "b", ""});
  d.add({{1}, {0}, {}, {}, 0, "a", ""});
  d.add({{0}, {1}, {}, {}, 0, "b", ""});
  const std::vector<double> s{0.2, 0.4, 0.6};
  std::vector<std::string> keys;
  const auto inst = user_instances(d, s, 5, &keys);
  EXPECT_EQ(keys, (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(inst[0].scores, (std::vector<double>{0.2, 0.6}));
  EXPECT_EQ(inst[0].labels, (std::vector<int>{1, 0}));
  EXPECT_EQ(inst[1].k, 5u);
}

TEST(HistoryCsvTest, Format) {
  std::ostringstream out;
  write_history_csv({{0, 0.5, std::nullopt, 0.25, 1.23456}, {1, 0.75, 1.0, 0.125, 2.0}}, out);
  EXPECT_EQ(out.str(),
            "iteration,train_micro_papk,val_micro_papk,loss,wall_time_s\n"
            "0,0.5,,0.25,1.235\n"
            "1,0.75,1,0.125,2.000\n");
}

}  // namespace
}  // namespace medres
