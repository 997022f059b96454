#include "gacn/discriminator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "gacn/error.hpp"

namespace gacn {
namespace {

Matrix row(std::initializer_list<double> v) {
  Matrix m(1, static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) m(0, i++) = x;
  return m;
}

Matrix random_matrix(Index r, Index c, Rng& rng) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = 2 * uniform01(rng) - 1;
  return m;
}

TEST(PoolGraph, Examples) {
  diff::Tape t;
  EXPECT_EQ(pool_graph(t.constant(row({1, 2}))).value(), row({1, 2, 1, 2}));
  Matrix two(2, 2);
  two << 1, 2, 3, 0;
  EXPECT_EQ(pool_graph(t.constant(two)).value(), row({2, 1, 3, 2}));
  EXPECT_EQ(pool_graph(t.constant(Matrix::Zero(3, 2))).value(), Matrix::Zero(1, 4));
  EXPECT_THROW(pool_graph(t.constant(Matrix::Zero(0, 2))), ContractViolation);
}

TEST(PoolGraph, NodePermutationInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x = random_matrix(7, 3, rng);
    Matrix y = x.colwise().reverse();
    diff::Tape t;
    EXPECT_TRUE(pool_graph(t.constant(x)).value().isApprox(pool_graph(t.constant(y)).value(), 1e-15));
  }
}

TEST(Discriminate, ZeroNetworkIsHalf) {
  Rng rng(2);
  MlpParams mlp = init_mlp(4, 8, 2, rng);
  diff::Tape t;
  auto vars = bind_mlp(t, mlp, false);
  EXPECT_DOUBLE_EQ(discriminate(t.constant(row({0.3, -1, 2, 5})), vars).p.scalar(), 0.5);

  MlpParams sum_net;
  sum_net.weights.push_back(Matrix::Ones(4, 1));
  sum_net.biases.push_back(Matrix::Zero(1, 1));
  auto sv = bind_mlp(t, sum_net, false);
  EXPECT_DOUBLE_EQ(discriminate(t.constant(Matrix::Zero(1, 4)), sv).p.scalar(), 0.5);
  // A huge logit clamps strictly below one.
  auto big = discriminate(t.constant(Matrix::Constant(1, 4, 1e3)), sv);
  EXPECT_EQ(big.p.scalar(), diff::kProbCeil);
  EXPECT_LT(big.p.scalar(), 1.0);
  EXPECT_THROW(discriminate(t.constant(Matrix::Zero(1, 3)), sv), ContractViolation);
}

TEST(BceLoss, Examples) {
  diff::Tape t;
  EXPECT_NEAR(bce_loss(t.scalar(0.5), 1).scalar(), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss(t.scalar(0.5), 0).scalar(), std::log(2.0), 1e-15);
  EXPECT_NEAR(bce_loss(t.scalar(1 - 1e-12), 1).scalar(), 1e-12, 1e-15);
  EXPECT_NEAR(bce_loss(t.scalar(0.25), 0).scalar(), 0.2876820724517809, 1e-15);
  EXPECT_NEAR(adversarial_loss(t.scalar(1 - 1e-12)).scalar(), 0.0, 1e-11);
  EXPECT_NEAR(adversarial_loss(t.scalar(0.5)).scalar(), std::log(2.0), 1e-15);
  EXPECT_NEAR(adversarial_loss(t.scalar(std::exp(-1.0))).scalar(), 1.0, 1e-15);
}

TEST(BceLoss, Properties) {
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    diff::Tape t;
    const double both = bce_loss(t.scalar(p), 1).scalar() + bce_loss(t.scalar(p), 0).scalar();
    if (i == 500) {
      EXPECT_NEAR(both, 2 * std::log(2.0), 1e-15);
    } else {
      EXPECT_GT(both, 2 * std::log(2.0));
    }
    EXPECT_EQ(adversarial_loss(t.scalar(p)).scalar(), bce_loss(t.scalar(p), 1).scalar());
    // The logit form agrees away from the clamp.
    const double z = std::log(p / (1 - p));
    EXPECT_NEAR(bce_with_logit(t.scalar(z), 0).scalar(), bce_loss(t.scalar(p), 0).scalar(), 1e-12);
  }
}

TEST(BceLoss, GradientWrtMlpMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    MlpParams mlp = init_mlp(8, 8, 2, rng);
    mlp.weights[1] = random_matrix(8, 1, rng);
    mlp.biases[0] = random_matrix(1, 8, rng);
    Matrix x = random_matrix(5, 4, rng);
    const int y = static_cast<int>(seed % 2);
    diff::ScalarFn f = [&](diff::Tape&, std::span<const diff::Var> p) {
      MlpVars v{{p[0], p[2]}, {p[1], p[3]}};
      auto d = discriminate(pool_graph(p[4]), v);
      return diff::add(bce_loss(d.p, y), bce_with_logit(d.logit, 1 - y));
    };
    auto r = diff::gradient_check(f, {mlp.weights[0], mlp.biases[0], mlp.weights[1], mlp.biases[1], x});
    ASSERT_TRUE(r.passed) << "seed " << seed << " err " << r.max_rel_error << " param " << r.worst_param;
  }
}

TEST(Mlp, InitShapesAndCheckpoint) {
  Rng rng(4);
  MlpParams mlp = init_mlp(256, 256, 2, rng);
  ASSERT_EQ(mlp.n_layers(), 2u);
  EXPECT_EQ(mlp.in_width(), 256);
  EXPECT_EQ(mlp.weights[1].cols(), 1);
  EXPECT_TRUE(mlp.weights[1].isZero());
  std::stringstream ss;
  save_mlp(ss, mlp);
  MlpParams back = load_mlp(ss);
  ASSERT_EQ(back.n_layers(), 2u);
  EXPECT_EQ(back.weights[0], mlp.weights[0]);
  EXPECT_EQ(back.biases[1], mlp.biases[1]);
}

}  // namespace
}  // namespace gacn
