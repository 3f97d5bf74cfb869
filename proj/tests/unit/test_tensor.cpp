#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dcvae/error.hpp"
#include "dcvae/tensor.hpp"

using namespace dcvae;

TEST(Tensor, ConstructionAndExtents) {
  const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.shape(), (Shape{2, 3}));
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.at(1, 2), 6.0);
  EXPECT_EQ(m.row(1)[0], 4.0);

  const Tensor v = Tensor::vector({7, 8});
  EXPECT_EQ(v.rank(), 1u);
  EXPECT_EQ(v.rows(), 1u);
  EXPECT_EQ(v.cols(), 2u);
  EXPECT_EQ(Tensor::scalar(3.5).item(), 3.5);
}

TEST(Tensor, DataSizeMismatchThrows) {
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW((void)Tensor::matrix({{1, 2}, {3}}), DimensionError);
}

TEST(Tensor, ItemRequiresOneElement) {
  EXPECT_THROW((void)Tensor({2}).item(), DimensionError);
}

TEST(Tensor, ReshapeKeepsOrder) {
  const Tensor m = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  const Tensor r = m.reshaped({3, 2});
  EXPECT_EQ(r.at(2, 1), 6.0);
  EXPECT_EQ(r.at(1, 0), 3.0);
  EXPECT_THROW((void)m.reshaped({4, 2}), DimensionError);
}

TEST(Tensor, FiniteCheck) {
  Tensor t({3}, 1.0);
  EXPECT_TRUE(t.all_finite());
  t[1] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(t.all_finite());
  t[1] = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(t.all_finite());
}

TEST(Tensor, SelectRows) {
  const Tensor m = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
  const std::vector<std::size_t> rows{2, 0, 2};
  const Tensor s = select_rows(m, rows);
  EXPECT_EQ(s, Tensor::matrix({{5, 6}, {1, 2}, {5, 6}}));
  const std::vector<std::size_t> bad{3};
  EXPECT_THROW((void)select_rows(m, bad), DimensionError);
}

TEST(Tensor, ShapeHelpers) {
  EXPECT_EQ(shape_numel({2, 3, 4}), 24u);
  EXPECT_EQ(shape_str({2, 3}), "[2x3]");
  EXPECT_THROW(Tensor({2, 0}), DimensionError);
}
