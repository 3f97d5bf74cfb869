#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dcvae/error.hpp"
#include "dcvae/probe.hpp"
#include "dcvae/rng.hpp"

using namespace dcvae;

namespace {

struct Blobs {
  Tensor x;
  std::vector<int> y;
};

Blobs blobs(std::size_t per_class, double spread, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::vector<double>> centres{{0, 0, 0}, {4, 0, 1}, {0, 5, -1}};
  Blobs b{Tensor({per_class * centres.size(), 3}), {}};
  std::normal_distribution<double> n(0, spread);
  for (std::size_t k = 0; k < centres.size(); ++k)
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = k * per_class + i;
      for (std::size_t c = 0; c < 3; ++c) b.x.at(r, c) = centres[k][c] + n(rng);
      b.y.push_back(static_cast<int>(k) * 10 + 5);  // arbitrary label values
    }
  return b;
}

}  // namespace

TEST(Probe, SeparableToyReachesFullTrainingAccuracy) {
  const Blobs b = blobs(30, 0.3, 1);
  const LinearProbe p = fit_probe({b.x, Split::train}, b.y, 0);
  EXPECT_EQ(p.classes, (std::vector<int>{5, 15, 25}));
  EXPECT_EQ(p.weight.shape(), (Shape{3, 3}));
  EXPECT_EQ(p.bias.shape(), (Shape{3}));
  EXPECT_TRUE(p.weight.all_finite());
  EXPECT_DOUBLE_EQ(p.accuracy(b.x, b.y), 1.0);
  EXPECT_EQ(p.predict(Tensor::matrix({{4, 0, 1}}))[0], 15);
}

TEST(Probe, ConvergesOnOverlappingClasses) {
  const Blobs b = blobs(40, 2.0, 2);
  const LinearProbe p = fit_probe({b.x, Split::train}, b.y, 0, {20000, 1e-5});
  EXPECT_LT(p.grad_norm, 1e-5);
  EXPECT_LT(p.iterations, 20000u);
}

// Permutation baseline: with labels unrelated to the features, held-out
// accuracy stays near chance.
TEST(Probe, ShuffledLabelsNearChance) {
  Rng rng(3);
  const std::size_t n = 4000;
  const Tensor x = normal_tensor({n, 5}, rng);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(i % 4);
  std::shuffle(y.begin(), y.end(), rng);
  std::vector<std::size_t> fit_rows, score_rows;
  for (std::size_t i = 0; i < n; ++i) (i % 2 ? score_rows : fit_rows).push_back(i);
  std::vector<int> yf, ys;
  for (auto i : fit_rows) yf.push_back(y[i]);
  for (auto i : score_rows) ys.push_back(y[i]);
  const LinearProbe p = fit_probe({select_rows(x, fit_rows), Split::train}, yf, 0);
  EXPECT_NEAR(p.accuracy(select_rows(x, score_rows), ys), 0.25, 0.03);
}

TEST(Probe, Deterministic) {
  const Blobs b = blobs(20, 1.0, 4);
  const LinearProbe a = fit_probe({b.x, Split::train}, b.y, 9);
  const LinearProbe c = fit_probe({b.x, Split::train}, b.y, 9);
  EXPECT_EQ(a.weight, c.weight);
  EXPECT_EQ(a.bias, c.bias);
}

TEST(Probe, RefusesTestFeaturesAndSingleClass) {
  const Blobs b = blobs(5, 1.0, 5);
  EXPECT_THROW(fit_probe({b.x, Split::test}, b.y, 0), ContractError);
  EXPECT_NO_THROW(fit_probe({b.x, Split::validation}, b.y, 0));
  const std::vector<int> one(b.y.size(), 3);
  EXPECT_THROW(fit_probe({b.x, Split::train}, one, 0), ConfigError);
  const std::vector<int> short_labels{1, 2};
  EXPECT_THROW(fit_probe({b.x, Split::train}, short_labels, 0), DimensionError);
}

// A constant feature column must not break standardisation.
TEST(Probe, ConstantFeatureColumn) {
  Blobs b = blobs(10, 0.3, 6);
  for (std::size_t r = 0; r < b.x.rows(); ++r) b.x.at(r, 2) = 7.0;
  const LinearProbe p = fit_probe({b.x, Split::train}, b.y, 0);
  EXPECT_TRUE(p.weight.all_finite());
  EXPECT_DOUBLE_EQ(p.accuracy(b.x, b.y), 1.0);
}

TEST(Probe, UnknownLabelsScoreAsWrong) {
  const Blobs b = blobs(10, 0.3, 7);
  const LinearProbe p = fit_probe({b.x, Split::train}, b.y, 0);
  const std::vector<int> other(b.y.size(), 99);
  EXPECT_EQ(p.accuracy(b.x, other), 0.0);
}
