#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "dcvae/error.hpp"
#include "dcvae/losses.hpp"
#include "dcvae/rng.hpp"

using namespace dcvae;

namespace {

// Brute-force biased MMD^2 straight from the definition.
double mmd2_oracle(const Tensor& x, const Tensor& y, double beta) {
  auto k = [&](std::span<const double> a, std::span<const double> b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return std::exp(-beta * d);
  };
  double xx = 0, yy = 0, xy = 0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j) xx += k(x.row(i), x.row(j));
  for (std::size_t i = 0; i < y.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) yy += k(y.row(i), y.row(j));
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < y.rows(); ++j) xy += k(x.row(i), y.row(j));
  const double m = static_cast<double>(x.rows()), n = static_cast<double>(y.rows());
  return xx / (m * m) + yy / (n * n) - 2 * xy / (m * n);
}

double mmd2_var(const Tensor& x, const Tensor& y, double beta) {
  Tape t;
  return mmd2(t.constant(x), t.constant(y), {beta}).value().item();
}

}  // namespace

TEST(Kernel, GaussianValue) {
  const std::vector<double> a{0, 1}, b{1, 3};
  EXPECT_NEAR(gaussian_kernel(a, b, {0.5}), std::exp(-2.5), 1e-15);
  EXPECT_EQ(gaussian_kernel(a, a, {3.0}), 1.0);
  EXPECT_THROW(gaussian_kernel(a, b, {0.0}), ConfigError);
  EXPECT_THROW(gaussian_kernel(a, b, {-1.0}), ConfigError);
}

TEST(Mmd, SinglePointsClosedForm) {
  const Tensor x = Tensor::matrix({{0}});
  const Tensor y = Tensor::matrix({{1}});
  // 1 + 1 - 2 exp(-1)
  EXPECT_NEAR(mmd2(x, y, {1.0}), 2.0 - 2.0 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(mmd2_var(x, y, 1.0), 2.0 - 2.0 * std::exp(-1.0), 1e-12);
}

TEST(Mmd, UnequalSetSizesMatchBruteForce) {
  const Tensor x = Tensor::matrix({{0}, {2}});
  const Tensor y = Tensor::matrix({{1}});
  const double oracle = mmd2_oracle(x, y, 0.5);
  // (2 + 2 e^-2) / 4 + 1 - 2 (2 e^-0.5) / 2
  EXPECT_NEAR(oracle, 0.5 + 0.5 * std::exp(-2.0) + 1.0 - 2.0 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(mmd2(x, y, {0.5}), oracle, 1e-9);
  EXPECT_NEAR(mmd2_var(x, y, 0.5), oracle, 1e-9);
}

TEST(Mmd, RandomSetsMatchBruteForce) {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Tensor x = normal_tensor({7, 3}, rng);
    const Tensor y = normal_tensor({4, 3}, rng, 2.0);
    EXPECT_NEAR(mmd2_var(x, y, 0.3), mmd2_oracle(x, y, 0.3), 1e-9);
  }
}

TEST(Mmd, IdenticalSetsGiveZero) {
  Rng rng(9);
  const Tensor x = normal_tensor({6, 4}, rng);
  EXPECT_NEAR(mmd2(x, x, {0.7}), 0.0, 1e-12);
  EXPECT_NEAR(mmd2_var(x, x, 0.7), 0.0, 1e-12);
}

TEST(Mmd, ShapeErrors) {
  EXPECT_THROW(mmd2(Tensor({2, 3}), Tensor({2, 2}), {1.0}), DimensionError);
  Tape t;
  EXPECT_THROW(mmd2(t.constant(Tensor({2, 3})), t.constant(Tensor({2, 2})), {1.0}), DimensionError);
}

TEST(GroupMmd, EqualsSumOverLabelPairs) {
  Rng rng(3);
  const Tensor z = normal_tensor({9, 2}, rng);
  const std::vector<int> labels{4, 1, 4, 7, 1, 1, 7, 4, 4};
  std::map<int, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < labels.size(); ++i) rows[labels[i]].push_back(i);
  double oracle = 0;
  for (auto a = rows.begin(); a != rows.end(); ++a)
    for (auto b = std::next(a); b != rows.end(); ++b)
      oracle += mmd2_oracle(select_rows(z, a->second), select_rows(z, b->second), 0.5);

  Tape t;
  const GroupMmd g = group_mmd(t.constant(z), labels, {0.5});
  EXPECT_EQ(g.groups, 3u);
  EXPECT_FALSE(g.degenerate);
  EXPECT_NEAR(g.value.value().item(), oracle, 1e-9);
}

TEST(GroupMmd, SingleLabelIsDegenerateZero) {
  Tape t;
  const std::vector<int> labels{2, 2, 2};
  const GroupMmd g = group_mmd(t.constant(Tensor({3, 2}, 1.0)), labels, {1.0});
  EXPECT_TRUE(g.degenerate);
  EXPECT_EQ(g.groups, 1u);
  EXPECT_EQ(g.value.value().item(), 0.0);
  const std::vector<int> short_labels{1, 2};
  EXPECT_THROW(group_mmd(t.constant(Tensor({3, 2})), short_labels, {1.0}), DimensionError);
}

TEST(Contrastive, ScalarCases) {
  const std::vector<double> a{0, 0}, b{0, 2};  // d2 = 4
  EXPECT_DOUBLE_EQ(contrastive_loss(a, b, true, {1.0}), 2.0);
  EXPECT_DOUBLE_EQ(contrastive_loss(a, b, false, {1.0}), 0.0);
  EXPECT_DOUBLE_EQ(contrastive_loss(a, b, false, {5.0}), 0.5);
  EXPECT_DOUBLE_EQ(contrastive_loss(a, a, true, {1.0}), 0.0);
  EXPECT_DOUBLE_EQ(contrastive_loss(a, a, false, {3.0}), 1.5);
  EXPECT_THROW(contrastive_loss(a, b, true, {0.0}), ConfigError);
}

TEST(Contrastive, BatchedMatchesScalar) {
  Rng rng(2);
  const Tensor vi = normal_tensor({6, 3}, rng);
  const Tensor vj = normal_tensor({6, 3}, rng);
  const Tensor e = Tensor::vector({1, 0, 0, 1, 0, 1});
  Tape t;
  const Var l = contrastive_loss(t.constant(vi), t.constant(vj), e, {4.0});
  ASSERT_EQ(l.shape(), (Shape{6}));
  for (std::size_t r = 0; r < 6; ++r) {
    double d2 = 0;
    for (std::size_t c = 0; c < 3; ++c) d2 += (vi.at(r, c) - vj.at(r, c)) * (vi.at(r, c) - vj.at(r, c));
    const double oracle = e[r] == 1 ? d2 / 2 : std::max(0.0, 4.0 - d2) / 2;
    EXPECT_NEAR(l.value()[r], oracle, 1e-12);
    EXPECT_NEAR(l.value()[r], contrastive_loss(vi.row(r), vj.row(r), e[r] == 1, {4.0}), 1e-12);
  }
}

TEST(Contrastive, HingeGradientVanishesBeyondMargin) {
  Tape t;
  const Var vi = t.variable(Tensor::matrix({{0, 0}}));
  const Var vj = t.variable(Tensor::matrix({{0, 3}}));
  t.backward(sum(contrastive_loss(vi, vj, Tensor::vector({0}), {1.0})));
  EXPECT_EQ(t.grad(vi), Tensor({1, 2}));
}
