#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "medres/diffcore/ops.h"
#include "medres/diffcore/random.h"
#include "medres/errors.h"
#include "support/gradcheck.h"

namespace medres {
namespace {

// Naive triple loop, independent of dense_matmul.
Tensor naive_product(const Tensor& a, const Tensor& b) {
  std::vector<double> out(a.rows() * b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out[i * b.cols() + j] = s;
    }
  }
  return Tensor(a.rows(), b.cols(), out);
}

Tensor eval(const std::function<Var(Tape&)>& f) {
  Tape t;
  return f(t).value();
}

TEST(TensorTest, RejectsWrongLengthAndNonFinite) {
  EXPECT_THROW(Tensor(2, 2, {1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor(1, 1, {std::numeric_limits<double>::quiet_NaN()}), NonFiniteError);
  EXPECT_THROW(Tensor(1, 1, {std::numeric_limits<double>::infinity()}), NonFiniteError);
  EXPECT_THROW((Tensor{{1, 2}, {3}}), DimensionError);
}

TEST(TensorTest, ZeroExtentIsAllowed) {
  Tensor t(0, 3, {});
  EXPECT_EQ(t.size(), 0u);
  EXPECT_EQ(t.cols(), 3u);
}

TEST(SparseMatrixTest, SortsAndRejectsDuplicates) {
  SparseMatrix s(2, 2, {{1, 0, 3.0}, {0, 1, 2.0}});
  EXPECT_EQ(s.entries().front(), (SparseEntry{0, 1, 2.0}));
  EXPECT_THROW(SparseMatrix(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), DataError);
  EXPECT_THROW(SparseMatrix(2, 2, {{2, 0, 1.0}}), DataError);
  EXPECT_THROW(SparseMatrix(2, 2, {{0, 0, std::nan("")}}), NonFiniteError);
}

TEST(SparseMatrixTest, ExplicitZeroIsSupport) {
  SparseMatrix s(2, 2, {{0, 0, 0.0}});
  EXPECT_EQ(s.nnz(), 1u);
  EXPECT_EQ(s.at(0, 0), 0.0);
}

TEST(MatmulTest, Examples) {
  const Tensor m{{1, 2}, {3, 4}};
  EXPECT_EQ(eval([&](Tape& t) { return ops::matmul(t.constant(Tensor::identity(2)), t.constant(m)); }), m);
  EXPECT_EQ(eval([&](Tape& t) {
              return ops::matmul(t.constant(Tensor{{1, 2}}), t.constant(Tensor{{0}, {0}}));
            }),
            (Tensor{{0}}));
  EXPECT_EQ(eval([&](Tape& t) { return ops::matmul(t.constant(m), t.constant(Tensor{{5}, {6}})); }),
            (Tensor{{17}, {39}}));
}

TEST(MatmulTest, ShapeMismatchThrows) {
  Tape t;
  EXPECT_THROW(ops::matmul(t.constant(Tensor::zeros(2, 3)), t.constant(Tensor::zeros(2, 3))),
               DimensionError);
}

TEST(MatmulTest, AgreesWithNaiveLoop) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.below(8), n = 1 + rng.below(8), p = 1 + rng.below(8);
    const Tensor a = uniform_tensor(m, n, 1.0, rng), b = uniform_tensor(n, p, 1.0, rng);
    EXPECT_LT(max_abs_diff(dense_matmul(a, b), naive_product(a, b)), 1e-12);
  }
}

TEST(SpmmTest, Examples) {
  const Tensor x{{1, 1}, {3, 5}};
  EXPECT_EQ(eval([&](Tape& t) { return ops::spmm(SparseMatrix::identity(2), t.constant(x)); }), x);
  EXPECT_EQ(eval([&](Tape& t) { return ops::spmm(SparseMatrix(2, 2), t.constant(x)); }),
            Tensor::zeros(2, 2));
  EXPECT_EQ(eval([&](Tape& t) { return ops::spmm(SparseMatrix(2, 2, {{0, 1, 2.0}}), t.constant(x)); }),
            (Tensor{{6, 10}, {0, 0}}));
}

TEST(SpmmTest, MatchesDenseProductOnRandomMatrices) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.below(8), n = 1 + rng.below(8), p = 1 + rng.below(8);
    std::vector<SparseEntry> e;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (e.size() < 64 && rng.bernoulli(0.3)) e.push_back({i, j, rng.uniform(-2, 2)});
    const SparseMatrix s(m, n, e);
    const Tensor x = uniform_tensor(n, p, 1.0, rng);
    const Tensor got = eval([&](Tape& t) { return ops::spmm(s, t.constant(x)); });
    EXPECT_LT(max_abs_diff(got, naive_product(s.densify(), x)), 1e-12);
  }
}

TEST(ElementwiseTest, Examples) {
  EXPECT_EQ(eval([](Tape& t) { return ops::relu(t.constant(Tensor{{-1, 0, 2}})); }),
            (Tensor{{0, 0, 2}}));
  EXPECT_EQ(eval([](Tape& t) { return ops::sigmoid(t.constant(Tensor::scalar(0))); }).item(), 0.5);
  EXPECT_EQ(eval([](Tape& t) {
              return ops::concat_cols({t.constant(Tensor{{1}}), t.constant(Tensor{{2, 3}})});
            }),
            (Tensor{{1, 2, 3}}));
}

TEST(ElementwiseTest, SigmoidIsFiniteAtExtremes) {
  const Tensor y = eval([](Tape& t) { return ops::sigmoid(t.constant(Tensor{{-800, 800}})); });
  EXPECT_GE(y(0, 0), 0.0);
  EXPECT_LE(y(0, 1), 1.0);
}

TEST(ConcatTest, RowMismatchThrows) {
  Tape t;
  EXPECT_THROW(ops::concat_cols({t.constant(Tensor::zeros(1, 1)), t.constant(Tensor::zeros(2, 1))}),
               DimensionError);
}

TEST(BceTest, Examples) {
  EXPECT_NEAR(eval([](Tape& t) { return ops::bce(t.constant(Tensor{{1}, {0}}), Tensor{{1}, {0}}); }).item(),
              0.0, 1e-11);
  EXPECT_NEAR(eval([](Tape& t) { return ops::bce(t.constant(Tensor::full(3, 1, 0.5)), Tensor{{1}, {0}, {1}}); }).item(),
              std::log(2.0), 1e-15);
  EXPECT_NEAR(eval([](Tape& t) { return ops::bce(t.constant(Tensor{{0.9}}), Tensor{{0}}); }).item(),
              -std::log(0.1), 1e-12);
}

TEST(BceTest, RejectsOutOfRangePrediction) {
  Tape t;
  EXPECT_THROW(ops::bce(t.constant(Tensor{{1.5}}), Tensor{{1}}), std::domain_error);
  EXPECT_THROW(ops::bce(t.constant(Tensor{{0.5}}), Tensor{{2}}), std::domain_error);
}

TEST(BackwardTest, SumOfMatrixGivesOnes) {
  ParameterStore s;
  s.add("W", Tensor{{1, 2}, {3, 4}});
  Tape t;
  const Gradients g = t.backward(ops::sum(t.parameter(s, "W")), &s);
  EXPECT_EQ(g.at("W"), Tensor::full(2, 2, 1.0));
}

TEST(BackwardTest, SigmoidAtZero) {
  ParameterStore s;
  s.add("w", Tensor::scalar(0));
  Tape t;
  EXPECT_DOUBLE_EQ(t.backward(ops::sigmoid(t.parameter(s, "w")), &s).at("w").item(), 0.25);
}

TEST(BackwardTest, UnreachedParameterGetsZeros) {
  ParameterStore s;
  s.add("used", Tensor::scalar(1));
  s.add("unused", Tensor::zeros(2, 3));
  Tape t;
  const Gradients g = t.backward(ops::sum(t.parameter(s, "used")), &s);
  EXPECT_EQ(g.at("unused"), Tensor::zeros(2, 3));
}

TEST(BackwardTest, NonScalarRootThrows) {
  ParameterStore s;
  s.add("w", Tensor::zeros(2, 1));
  Tape t;
  EXPECT_THROW(t.backward(t.parameter(s, "w"), &s), DimensionError);
}

TEST(BackwardTest, FanOutAccumulates) {
  ParameterStore s;
  s.add("x", Tensor::scalar(3));
  Tape t;
  Var x = t.parameter(s, "x");
  // d/dx (x*2 + x) = 3
  EXPECT_DOUBLE_EQ(t.backward(ops::sum(ops::add(ops::scale(x, 2), x)), &s).at("x").item(), 3.0);
}

TEST(BackwardTest, GatherScattersToSelectedRowsOnly) {
  ParameterStore s;
  s.add("T", Tensor::zeros(3, 2));
  Tape t;
  const Gradients g = t.backward(ops::sum(ops::gather_rows(t.parameter(s, "T"), {1, 1})), &s);
  EXPECT_EQ(g.at("T"), (Tensor{{0, 0}, {2, 2}, {0, 0}}));
  EXPECT_THROW(ops::gather_rows(t.parameter(s, "T"), {3}), std::out_of_range);
}

TEST(GradientCheckTest, EveryPrimitiveOnRandomShapes) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (const auto& c : testing::op_cases(seed)) {
      const auto r = testing::check_gradients(c.store, c.loss);
      EXPECT_LT(r.max_rel_error, 1e-4) << c.name << " seed " << seed << " at " << r.worst;
    }
  }
}

TEST(GradientCheckTest, ThreeLayerNet) {
  Rng rng(21);
  ParameterStore s;
  s.add("W1", glorot_uniform(4, 6, rng));
  s.add("b1", uniform_tensor(1, 6, 0.1, rng), false);
  s.add("W2", glorot_uniform(6, 5, rng));
  s.add("W3", glorot_uniform(5, 1, rng));
  const Tensor x = uniform_tensor(7, 4, 1.0, rng);
  const Tensor y{{1}, {0}, {1}, {1}, {0}, {0}, {1}};
  const auto r = testing::check_gradients(s, [&](Tape& t, const ParameterStore& st) {
    Var h = ops::relu(ops::add(ops::matmul(t.constant(x), t.parameter(st, "W1")), t.parameter(st, "b1")));
    h = ops::relu(ops::matmul(h, t.parameter(st, "W2")));
    return ops::bce(ops::sigmoid(ops::matmul(h, t.parameter(st, "W3"))), y);
  });
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst;
  EXPECT_GT(r.checked, 60u);
}

TEST(TapeTest, DeterministicLossAndGradients) {
  auto run = [] {
    Rng rng(3);
    ParameterStore s;
    s.add("W", glorot_uniform(5, 3, rng));
    const Tensor x = uniform_tensor(4, 5, 1.0, rng);
    Tape t;
    Var loss = ops::sum_squares(ops::sigmoid(ops::matmul(t.constant(x), t.parameter(s, "W"))));
    return std::make_pair(loss.value().item(), t.backward(loss, &s).at("W"));
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(AdamTest, ZeroGradientLeavesParametersButCountsStep) {
  ParameterStore s;
  s.add("w", Tensor{{1, -2}});
  adam_step(s, {{"w", Tensor::zeros(1, 2)}}, {0.1});
  EXPECT_EQ(s.get("w"), (Tensor{{1, -2}}));
  EXPECT_EQ(s.entry("w").step, 1);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ParameterStore s;
  s.add("w", Tensor::scalar(0.5));
  adam_step(s, {{"w", Tensor::scalar(1)}}, {0.1});
  EXPECT_NEAR(s.get("w").item(), 0.5 - 0.1, 1e-7);
}

TEST(AdamTest, MatchesScalarReferenceTrace) {
  // Scalar recurrences evaluated independently.
  const double lr = 0.01, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double theta = 1.0, m = 0.0, v = 0.0;
  ParameterStore s;
  s.add("w", Tensor::scalar(theta));
  const double gs[] = {0.3, -1.2, 0.7};
  for (int t = 1; t <= 3; ++t) {
    const double g = gs[t - 1];
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, t)), vh = v / (1 - std::pow(b2, t));
    theta -= lr * mh / (std::sqrt(vh) + eps);
    adam_step(s, {{"w", Tensor::scalar(g)}}, {lr, b1, b2, eps});
    EXPECT_NEAR(s.get("w").item(), theta, 1e-14);
  }
}

TEST(AdamTest, MissingGradientThrows) {
  ParameterStore s;
  s.add("a", Tensor::scalar(0));
  s.add("b", Tensor::scalar(0));
  EXPECT_THROW(adam_step(s, {{"a", Tensor::scalar(1)}}, {}), std::invalid_argument);
}

TEST(ParameterStoreTest, DuplicateNameAndShapeChecks) {
  ParameterStore s;
  s.add("w", Tensor::zeros(2, 2));
  EXPECT_THROW(s.add("w", Tensor::zeros(1, 1)), std::invalid_argument);
  EXPECT_THROW(s.set("w", Tensor::zeros(1, 1)), DimensionError);
  EXPECT_EQ(s.entry("w").first_moment.shape(), s.get("w").shape());
}

TEST(RngTest, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(c.below(7), 7u);
  }
}

}  // namespace
}  // namespace medres
