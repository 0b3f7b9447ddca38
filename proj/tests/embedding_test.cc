#include <cmath>

#include <gtest/gtest.h>

#include "medres/embedding/blocks.h"
#include "medres/errors.h"
#include "support/gradcheck.h"

namespace medres::embed {
namespace {

Tensor dense_relu(Tensor t) {
  std::vector<double> d(t.data().begin(), t.data().end());
  for (double& v : d) v = std::max(0.0, v);
  return Tensor(t.rows(), t.cols(), d);
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

GraphSet pair_set(std::size_t a, std::size_t b, std::size_t graphs, Rng& rng,
                  double density = 0.4) {
  EntityCatalog cat;
  cat.add_type("a", a);
  cat.add_type("b", b);
  GraphSet gs(std::move(cat));
  for (std::size_t g = 0; g < graphs; ++g) {
    std::vector<SparseEntry> e;
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j)
        if (rng.bernoulli(density)) e.push_back({i, j, 1.0 + rng.below(5)});
    gs.add_graph({"g" + std::to_string(g), 0, 1, SparseMatrix(a, b, std::move(e))});
  }
  return gs;
}

// Dense block matrix [[0, R], [R^T, 0]] built from scratch.
Tensor dense_block(const Tensor& r) {
  const std::size_t n = r.rows() + r.cols();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < r.rows(); ++i) {
    for (std::size_t j = 0; j < r.cols(); ++j) {
      d[i * n + r.rows() + j] = r(i, j);
      d[(r.rows() + j) * n + i] = r(i, j);
    }
  }
  return Tensor(n, n, d);
}

TEST(NormalizeAdjacencyTest, MatchesDenseFormula) {
  const SparseMatrix a(3, 3, {{0, 1, 2.0}, {1, 0, 2.0}, {1, 2, 1.0}, {2, 1, 1.0}});
  const Tensor dense = a.densify();
  std::vector<double> deg(3, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) deg[i] += dense(i, j) + (i == j ? 1.0 : 0.0);
  }
  const Tensor got = normalize_adjacency(a).densify();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double aij = dense(i, j) + (i == j ? 1.0 : 0.0);
      EXPECT_NEAR(got(i, j), aij / std::sqrt(deg[i] * deg[j]), 1e-15);
    }
  }
  EXPECT_THROW(normalize_adjacency(SparseMatrix(2, 3)), DimensionError);
}

TEST(GcnLayerTest, Examples) {
  Tape t;
  const Tensor x{{1, 0}, {0, 1}};
  Var xv = t.constant(x), w = t.constant(Tensor::identity(2));
  EXPECT_EQ(gcn_layer(SparseMatrix::identity(2), xv, w).value(), x);
  EXPECT_EQ(gcn_layer(SparseMatrix(2, 2), xv, w).value(), Tensor::zeros(2, 2));
  EXPECT_EQ(gcn_layer(SparseMatrix(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}}), xv, w).value(),
            (Tensor{{0, 1}, {1, 0}}));
}

TEST(TransformAdjacencyTest, Examples) {
  Rng rng(1);
  const GraphSet gs = pair_set(2, 3, 2, rng, 0.8);
  const auto agg = aggregate(gs, TypePair::of(0, 1));
  Tape t;
  const Var v = transform_adjacency(
      t, agg, {t.constant(Tensor::zeros(2, 1)), t.constant(Tensor::scalar(0))});
  for (double x : v.value().data()) EXPECT_EQ(x, 0.5);

  EntityCatalog cat;
  cat.add_type("a", 1);
  cat.add_type("b", 1);
  GraphSet one(std::move(cat));
  one.add_graph({"g", 0, 1, SparseMatrix(1, 1, {{0, 0, 2.0}})});
  const Var s = transform_adjacency(t, aggregate(one, TypePair::of(0, 1)),
                                    {t.constant(Tensor{{1}}), t.constant(Tensor::scalar(0))});
  EXPECT_NEAR(s.value().item(), 0.8807970779778823, 1e-15);

  EXPECT_THROW(transform_adjacency(t, agg, {t.constant(Tensor{{1}}), t.constant(Tensor::scalar(0))}),
               DimensionError);
}

TEST(TransformAdjacencyTest, EmptySupportStaysEmpty) {
  EntityCatalog cat;
  cat.add_type("a", 2);
  cat.add_type("b", 2);
  GraphSet gs(std::move(cat));
  gs.add_graph({"g", 0, 1, SparseMatrix(2, 2)});
  const auto agg = aggregate(gs, TypePair::of(0, 1));
  Tape t;
  const Var v = transform_adjacency(t, agg, {t.constant(Tensor{{3}}), t.constant(Tensor::scalar(5))});
  EXPECT_EQ(transformed_matrix(agg, v).nnz(), 0u);
}

TEST(TransformAdjacencyTest, PreservesSupportOnRandomInputs) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const GraphSet gs = pair_set(1 + rng.below(6), 1 + rng.below(6), 1 + rng.below(3), rng);
    const auto agg = aggregate(gs, TypePair::of(0, 1));
    Tape t;
    const Var alpha = t.constant(uniform_tensor(agg.multiplicity(), 1, 5.0, rng));
    const Var beta = t.constant(uniform_tensor(1, 1, 5.0, rng));
    const SparseMatrix m = transformed_matrix(agg, transform_adjacency(t, agg, {alpha, beta}));
    ASSERT_EQ(m.nnz(), agg.nnz());
    for (std::size_t e = 0; e < m.nnz(); ++e) {
      EXPECT_EQ(m.entries()[e].row, agg.support[e].first);
      EXPECT_EQ(m.entries()[e].col, agg.support[e].second);
    }
    const Tensor dense = m.densify();
    for (std::size_t i = 0; i < agg.rows; ++i)
      for (std::size_t j = 0; j < agg.cols; ++j)
        if (m.at(i, j) == 0.0) { EXPECT_EQ(dense(i, j), 0.0); }
  }
}

TEST(PairPropagationTest, PatternIsBlockOfSupport) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const GraphSet gs = pair_set(1 + rng.below(5), 1 + rng.below(5), 2, rng);
    const auto agg = aggregate(gs, TypePair::of(0, 1));
    const auto prop = pair_propagation(agg);
    std::vector<double> ids(agg.nnz());
    for (std::size_t e = 0; e < ids.size(); ++e) ids[e] = 1.0 + e;
    const SparseMatrix rect = SparseMatrix(agg.rows, agg.cols,
                                           [&] {
                                             std::vector<SparseEntry> v;
                                             for (std::size_t e = 0; e < agg.nnz(); ++e)
                                               v.push_back({agg.support[e].first,
                                                            agg.support[e].second, ids[e]});
                                             return v;
                                           }());
    std::vector<double> mapped;
    for (std::size_t k : prop.edge_of_entry) mapped.push_back(ids[k]);
    EXPECT_EQ(prop.pattern.with_values(mapped), block_adjacency(rect));
  }
}

TEST(AlgcnLayerTest, SingleTransformEqualsGcnOnTransformedBlock) {
  Rng rng(31);
  const GraphSet gs = pair_set(3, 4, 2, rng);
  const auto agg = aggregate(gs, TypePair::of(0, 1));
  const auto prop = pair_propagation(agg);
  Tape t;
  const Var stacked = t.constant(agg.weights);
  const Var x = t.constant(uniform_tensor(7, 3, 1.0, rng));
  const Var w = t.constant(uniform_tensor(3, 2, 1.0, rng));
  const AdjacencyTransform tr{t.constant(Tensor{{0.3}, {-0.2}}), t.constant(Tensor::scalar(0.1))};
  const Var got = algcn_layer(prop, stacked, x, w, {tr});
  const SparseMatrix fa = transformed_matrix(agg, transform_adjacency(stacked, tr));
  const Var want = gcn_layer(block_adjacency(fa), x, w);
  EXPECT_LT(max_abs_diff(got.value(), want.value()), 1e-14);
}

TEST(AlgcnLayerTest, IdenticalTransformsGiveIdenticalBlocks) {
  Rng rng(37);
  const GraphSet gs = pair_set(3, 3, 2, rng);
  const auto agg = aggregate(gs, TypePair::of(0, 1));
  Tape t;
  const AdjacencyTransform tr{t.constant(Tensor{{0.5}, {0.5}}), t.constant(Tensor::scalar(-1))};
  const Var out = algcn_layer(pair_propagation(agg), t.constant(agg.weights),
                              t.constant(uniform_tensor(6, 2, 1.0, rng)),
                              t.constant(uniform_tensor(2, 3, 1.0, rng)), {tr, tr});
  ASSERT_EQ(out.cols(), 6u);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out.value()(i, j), out.value()(i, j + 3));
}

TEST(AlgcnLayerTest, TwoNodeHandSetCase) {
  // One a-node, one b-node, two graphs with weights 2 and 1 on the edge.
  EntityCatalog cat;
  cat.add_type("a", 1);
  cat.add_type("b", 1);
  GraphSet gs(std::move(cat));
  gs.add_graph({"g0", 0, 1, SparseMatrix(1, 1, {{0, 0, 2.0}})});
  gs.add_graph({"g1", 0, 1, SparseMatrix(1, 1, {{0, 0, 1.0}})});
  const auto agg = aggregate(gs, TypePair::of(0, 1));
  Tape t;
  const Tensor x{{1, 2}, {-1, 3}};
  const Tensor w{{1, 0}, {0.5, -1}};
  const AdjacencyTransform t1{t.constant(Tensor{{1}, {0}}), t.constant(Tensor::scalar(0))};
  const AdjacencyTransform t2{t.constant(Tensor{{0}, {-1}}), t.constant(Tensor::scalar(1))};
  const Var out = algcn_layer(pair_propagation(agg), t.constant(agg.weights), t.constant(x),
                              t.constant(w), {t1, t2});
  const Tensor xw = dense_matmul(x, w);
  const double f1 = logistic(2.0), f2 = logistic(0.0);
  const Tensor b1 = dense_relu(dense_matmul(Tensor{{0, f1}, {f1, 0}}, xw));
  const Tensor b2 = dense_relu(dense_matmul(Tensor{{0, f2}, {f2, 0}}, xw));
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(out.value()(i, j), b1(i, j), 1e-15);
      EXPECT_NEAR(out.value()(i, j + 2), b2(i, j), 1e-15);
    }
  }
}

TEST(AlgcnLayerTest, SaturatedTransformApproachesBinarizedGcn) {
  Rng rng(41);
  const GraphSet gs = pair_set(4, 3, 2, rng, 0.5);
  const auto agg = aggregate(gs, TypePair::of(0, 1));
  Tape t;
  const Var x = t.constant(uniform_tensor(7, 3, 1.0, rng));
  const Var w = t.constant(uniform_tensor(3, 2, 1.0, rng));
  const Var out = algcn_layer(pair_propagation(agg), t.constant(agg.weights), x, w,
                              {{t.constant(Tensor{{100}, {100}}), t.constant(Tensor::scalar(0))}});
  std::vector<SparseEntry> bin;
  for (const auto& [i, j] : agg.support) bin.push_back({i, j, 1.0});
  const Var want = gcn_layer(block_adjacency(SparseMatrix(4, 3, bin)), x, w);
  EXPECT_LT(max_abs_diff(out.value(), want.value()), 1e-3);
}

TEST(AlgcnBlockTest, WidthBookkeepingOnRandomConfigs) {
  Rng rng(43);
  for (int trial = 0; trial < 200; ++trial) {
    const GraphSet gs = pair_set(1 + rng.below(5), 1 + rng.below(5), 1 + rng.below(3), rng);
    AlgcnConfig cfg{1 + rng.below(3), 1 + rng.below(4), 1 + rng.below(4), rng.bernoulli(0.5)};
    const AlgcnBlock block("p", aggregate(gs, TypePair::of(0, 1)),
                           NodeInput::for_pair(gs.catalog(), TypePair::of(0, 1)), cfg);
    EXPECT_EQ(block.output_width(), cfg.layers * cfg.transforms * cfg.width);
    for (std::size_t l = 1; l < cfg.layers; ++l) {
      EXPECT_EQ(block.layer_input_width(l), cfg.transforms * cfg.width);
    }
    ParameterStore s;
    block.init_parameters(s, rng);
    Tape t;
    const Var z = block.forward(t, s);
    EXPECT_EQ(z.cols(), block.output_width());
    EXPECT_EQ(z.rows(), gs.catalog().type(0).size + gs.catalog().type(1).size);
  }
}

TEST(AlgcnBlockTest, ParameterNamesAndInit) {
  Rng rng(47);
  const GraphSet gs = pair_set(2, 3, 2, rng);
  const AlgcnBlock block("pair0", aggregate(gs, TypePair::of(0, 1)),
                         NodeInput::for_pair(gs.catalog(), TypePair::of(0, 1)), {2, 4, 2, false});
  ParameterStore s;
  block.init_parameters(s, rng);
  EXPECT_EQ(s.get(block.alpha_name(1, 1)), Tensor::full(2, 1, 1.0));
  EXPECT_EQ(s.get(block.beta_name(0, 0)), Tensor::scalar(0));
  EXPECT_FALSE(s.entry(block.alpha_name(0, 0)).decay);
  EXPECT_TRUE(s.entry(block.weight_name(0, 0)).decay);
  EXPECT_EQ(s.get(block.weight_name(0, 0)).shape(), (std::vector<std::size_t>{5, 4}));
  EXPECT_EQ(s.get(block.weight_name(1, 0)).shape(), (std::vector<std::size_t>{8, 4}));
  const double limit = std::sqrt(6.0 / 12.0);
  for (double v : s.get(block.weight_name(1, 0)).data()) EXPECT_LE(std::fabs(v), limit);
}

TEST(AlgcnBlockTest, TransformCountMustBeInRange) {
  Rng rng(53);
  const GraphSet gs = pair_set(2, 2, 1, rng);
  const auto agg = aggregate(gs, TypePair::of(0, 1));
  const auto in = NodeInput::for_pair(gs.catalog(), TypePair::of(0, 1));
  EXPECT_THROW(AlgcnBlock("p", agg, in, {2, 4, 0, false}), ConfigError);
  EXPECT_THROW(AlgcnBlock("p", agg, in, {2, 4, 9, false}), ConfigError);
}

TEST(AlgcnBlockTest, OutputsStayFiniteUnderRandomParameters) {
  Rng rng(59);
  const GraphSet gs = pair_set(4, 5, 2, rng);
  const AlgcnBlock block("p", aggregate(gs, TypePair::of(0, 1)),
                         NodeInput::for_pair(gs.catalog(), TypePair::of(0, 1)), {2, 3, 2, false});
  ParameterStore base;
  block.init_parameters(base, rng);
  for (int draw = 0; draw < 1000; ++draw) {
    ParameterStore s;
    for (const auto& name : base.names()) {
      const Tensor& v = base.get(name);
      s.add(name, uniform_tensor(v.rows(), v.cols(), 10.0, rng));
    }
    Tape t;
    for (double v : block.forward(t, s).value().data()) ASSERT_TRUE(std::isfinite(v));
  }
}

TEST(AlgcnBlockTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const GraphSet gs = pair_set(3, 2, 2, rng, 0.6);
    for (bool per_branch : {false, true}) {
      const AlgcnBlock block("p", aggregate(gs, TypePair::of(0, 1)),
                             NodeInput::for_pair(gs.catalog(), TypePair::of(0, 1)),
                             {2, 2, 2, per_branch});
      ParameterStore s;
      block.init_parameters(s, rng);
      const Tensor r = uniform_tensor(block.output_width(), 1, 1.0, rng);
      const auto rep = testing::check_gradients(s, [&](Tape& t, const ParameterStore& st) {
        return ops::sum(ops::matmul(block.forward(t, st), t.constant(r)));
      });
      EXPECT_LT(rep.max_rel_error, 1e-4) << "seed " << seed << " " << rep.worst;
    }
  }
}

TEST(ResidualConcatTest, Examples) {
  Tape t;
  const Var a = t.constant(Tensor{{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(residual_concat({a}).value(), a.value());
  const Var z = residual_concat({a, t.constant(Tensor::full(2, 5, 7.0))});
  EXPECT_EQ(z.cols(), 8u);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(z.value()(1, j), a.value()(1, j));
  EXPECT_THROW(residual_concat({a, t.constant(Tensor::zeros(3, 1))}), DimensionError);
}

TEST(EmbMergeTest, Examples) {
  Tape t;
  const Var za = t.constant(Tensor{{1, 2}}), zb = t.constant(Tensor{{3, 0}, {0.5, 1}});
  const Var eye = t.constant(Tensor::identity(2)), zero = t.constant(Tensor::zeros(1, 2));
  const auto same = emb_merge({za}, {zb}, eye, zero, eye, zero);
  EXPECT_EQ(same.first.value(), za.value());
  EXPECT_EQ(same.second.value(), zb.value());

  const auto gated = emb_merge({za}, {zb}, eye, t.constant(Tensor::full(1, 2, -100)), eye, zero);
  EXPECT_EQ(gated.first.value(), Tensor::zeros(1, 2));

  // Two graphs: Z = [z1 z2] is 1x4, W is 4x2, c = [0.5, -1].
  const Var z1 = t.constant(Tensor{{1, -1}}), z2 = t.constant(Tensor{{2, 0}});
  const Var w = t.constant(Tensor{{1, 0}, {0, 1}, {1, 1}, {2, -1}});
  const auto two = emb_merge({z1, z2}, {zb, zb}, w, t.constant(Tensor{{0.5, -1}}),
                             w, t.constant(Tensor::zeros(1, 2)));
  // [1 -1 2 0] W = [3, 1]; + c = [3.5, 0]
  EXPECT_EQ(two.first.value(), (Tensor{{3.5, 0}}));
}

TEST(FreeLookupTest, RowsAndRepeats) {
  Tape t;
  const Var table = t.constant(Tensor{{1, 2}, {3, 4}});
  EXPECT_EQ(free_lookup(table, {0}).value(), (Tensor{{1, 2}}));
  EXPECT_EQ(free_lookup(table, {1, 1}).value(), (Tensor{{3, 4}, {3, 4}}));
  EXPECT_THROW(free_lookup(table, {2}), std::out_of_range);
}

TEST(FreeEmbeddingTableTest, InitRangeAndNoDecay) {
  Rng rng(61);
  FreeEmbeddingTable table("free/user", 20, 3);
  ParameterStore s;
  table.init_parameters(s, rng);
  EXPECT_FALSE(s.entry("free/user").decay);
  for (double v : s.get("free/user").data()) EXPECT_LE(std::fabs(v), FreeEmbeddingTable::kInitRange);
}

TEST(GcnStackTest, MatchesDenseStack) {
  Rng rng(67);
  const GraphSet gs = pair_set(2, 3, 1, rng, 0.7);
  const SparseMatrix rect = oriented_adjacency(gs, 0, TypePair::of(0, 1));
  const GcnStack stack("g", rect, NodeInput::for_pair(gs.catalog(), TypePair::of(0, 1)), 2, 3, false);
  ParameterStore s;
  stack.init_parameters(s, rng);
  Tape t;
  const Tensor got = stack.forward(t, s).value();
  // One-hot input: layer 0 is relu(A W0).
  const Tensor a = dense_block(rect.densify());
  Tensor h = dense_relu(dense_matmul(a, s.get(stack.weight_name(0))));
  h = dense_relu(dense_matmul(a, dense_matmul(h, s.get(stack.weight_name(1)))));
  EXPECT_LT(max_abs_diff(got, h), 1e-13);
}

}  // namespace
}  // namespace medres::embed
