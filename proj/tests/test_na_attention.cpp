#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "r2f/na_attention.hpp"
#include "support.hpp"

using namespace r2f;

TEST(NaAttention, StandardSim)
{
  Eigen::VectorXd q = Eigen::VectorXd::Zero(4);
  q[0] = 1.0;
  EXPECT_DOUBLE_EQ(standard_sim(q, q), 0.5);
  Eigen::VectorXd k = Eigen::VectorXd::Zero(4);
  k[1] = 1.0;
  EXPECT_DOUBLE_EQ(standard_sim(q, k), 0.0);
  Eigen::VectorXd one(1), two(1);
  one << 1.0;
  two << 2.0;
  EXPECT_DOUBLE_EQ(standard_sim(two, one), 2.0);
}

TEST(NaAttention, GaussianModulation)
{
  Eigen::VectorXd k(1);
  k << 1.0;
  EXPECT_NEAR(naclip_sim(k, k, Vec2(0, 0), Vec2(3, 4), 5.0), std::exp(-0.5), 1e-12);
  const PatchGrid g = PatchGrid::random(3, 3, 16, 4, 10.0, 5);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double plain = standard_sim(g.keys[i], g.keys[j]);
      EXPECT_DOUBLE_EQ(naclip_sim(g.keys[i], g.keys[j], g.centers[i], g.centers[i], 1.0), plain);
      EXPECT_NEAR(naclip_sim(g.keys[i], g.keys[j], g.centers[i], g.centers[j], 1e9), plain, 1e-9);
    }
  }
}

TEST(NaAttention, UniformWhenEverythingCoincides)
{
  PatchGrid g = PatchGrid::random(2, 3, 8, 5, 4.0, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.keys[i] = g.keys[0];
    g.centers[i] = Vec2(1, 1);
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(5);
  for (const auto & v : g.values) mean += v / static_cast<double>(g.size());
  for (const auto & o : na_attend(g, 2.0)) EXPECT_NEAR((o - mean).norm(), 0.0, 1e-12);
}

TEST(NaAttention, SinglePatchIsIdentity)
{
  const PatchGrid g = PatchGrid::random(1, 1, 8, 3, 4.0, 2);
  const auto out = na_attend(g, 1.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR((out[0] - g.values[0]).norm(), 0.0, 1e-15);
}

TEST(NaAttention, MatchesNaiveReference)
{
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PatchGrid g = PatchGrid::random(2, 2, 16, 6, 1.0, seed);
    const auto fast = na_attend(g, 1.0);
    const auto ref = test::naive_attend(g, 1.0);
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_LT((fast[i] - ref[i]).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(NaAttention, RowsAreStochastic)
{
  const PatchGrid g = PatchGrid::random(4, 4, 32, 8, 8.0, 3);
  const Eigen::MatrixXd w = na_attention_weights(g, 6.0);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    EXPECT_NEAR(w.row(i).sum(), 1.0, 1e-12);
    EXPECT_GE(w.row(i).minCoeff(), 0.0);
  }
  std::ostringstream csv;
  write_attention_csv(csv, w);
  EXPECT_EQ(csv.str().rfind("i,j,weight\n", 0), 0u);
}

TEST(NaAttention, RejectsBadInput)
{
  PatchGrid g = PatchGrid::random(2, 2, 4, 4, 1.0, 0);
  EXPECT_THROW(na_attend(g, 0.0), InvalidArgument);
  g.keys.pop_back();
  EXPECT_THROW(g.validate(), InvalidArgument);
}
