#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "tbm/linalg.hpp"

using tbm::DenseMatrix;

namespace {

double reconstructionError(const DenseMatrix& a, const tbm::EigenPairs& e) {
  const std::size_t n = a.rows();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
      worst = std::max(worst, std::abs(s - a(i, j)));
    }
  return worst;
}

double orthogonalityError(const DenseMatrix& v) {
  double worst = 0.0;
  for (std::size_t a = 0; a < v.cols(); ++a)
    for (std::size_t b = 0; b < v.cols(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.rows(); ++i) s += v(i, a) * v(i, b);
      worst = std::max(worst, std::abs(s - (a == b ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST(SymEigen, Identity) {
  const auto e = tbm::symEigen(DenseMatrix::identity(4));
  for (double v : e.values) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(SymEigen, DiagonalGivesCoordinateVectors) {
  DenseMatrix d(3, 3);
  d(0, 0) = 3;
  d(1, 1) = -5;
  d(2, 2) = 2;
  const auto e = tbm::symEigen(d);
  EXPECT_NEAR(e.values[0], -5, 1e-14);
  EXPECT_NEAR(e.values[1], 2, 1e-14);
  EXPECT_NEAR(e.values[2], 3, 1e-14);
  // Sign convention: first nonzero component positive.
  EXPECT_NEAR(e.vectors(1, 0), 1.0, 1e-14);
  EXPECT_NEAR(e.vectors(2, 1), 1.0, 1e-14);
  EXPECT_NEAR(e.vectors(0, 2), 1.0, 1e-14);
}

TEST(SymEigen, SwapMatrix) {
  const auto e = tbm::symEigen(DenseMatrix(2, 2, {0, 1, 1, 0}));
  EXPECT_NEAR(e.values[0], -1, 1e-15);
  EXPECT_NEAR(e.values[1], 1, 1e-15);
}

TEST(SymEigen, RandomResiduals) {
  std::mt19937_64 gen(21);
  for (std::size_t n : {1u, 2u, 5u, 17u, 60u}) {
    const auto a = oracle::randomSymmetric(n, gen);
    const auto e = tbm::symEigen(a);
    EXPECT_LT(reconstructionError(a, e), 1e-11 * n);
    EXPECT_LT(orthogonalityError(e.vectors), 1e-12 * n);
    EXPECT_TRUE(std::is_sorted(e.values.begin(), e.values.end()));
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t i = 0;
      while (i < n && std::abs(e.vectors(i, k)) < 1e-300) ++i;
      EXPECT_GT(e.vectors(i, k), 0.0);
    }
  }
}

TEST(SymEigen, RejectsBadInput) {
  EXPECT_THROW(tbm::symEigen(DenseMatrix(2, 3)), tbm::DimensionError);
  EXPECT_THROW(tbm::symEigen(DenseMatrix(2, 2, {0, 1, 2, 0})), std::invalid_argument);
  EXPECT_THROW(tbm::symEigen(DenseMatrix(2, 2, {std::nan(""), 0, 0, 1})), std::invalid_argument);
}

TEST(TopByAbs, OrderingAndTies) {
  DenseMatrix d(3, 3);
  d(0, 0) = 3;
  d(1, 1) = -5;
  d(2, 2) = 2;
  const auto top = tbm::topByAbs(tbm::symEigen(d), 2);
  ASSERT_EQ(top.values.size(), 2u);
  EXPECT_NEAR(top.values[0], -5, 1e-14);
  EXPECT_NEAR(top.values[1], 3, 1e-14);

  const auto tie = tbm::topByAbs(tbm::symEigen(DenseMatrix(2, 2, {2, 0, 0, -2})), 1);
  EXPECT_NEAR(tie.values[0], 2.0, 1e-15);

  const auto full = tbm::topByAbs(tbm::symEigen(d), 3);
  EXPECT_EQ(full.values.size(), 3u);
  EXPECT_THROW(tbm::topByAbs(tbm::symEigen(d), 4), std::out_of_range);
}

TEST(BestRankR, FullRankAndRankOne) {
  std::mt19937_64 gen(22);
  const auto a = oracle::randomSymmetric(5, gen);
  EXPECT_LT(oracle::maxAbsDiff(tbm::bestRankR(a, 5).data(), a.data()), 1e-12);

  DenseMatrix u = oracle::randomMatrix(4, 1, gen);
  const auto uut = oracle::matmul(u, u.transposed());
  EXPECT_LT(oracle::maxAbsDiff(tbm::bestRankR(uut, 1).data(), uut.data()), 1e-12);
}

TEST(BestRankR, ErrorEqualsDiscardedSpectrum) {
  std::mt19937_64 gen(23);
  const auto a = oracle::randomSymmetric(6, gen);
  auto values = tbm::symEigen(a).values;
  std::sort(values.begin(), values.end(), [](double x, double y) { return std::abs(x) > std::abs(y); });
  double discarded = 0.0;
  for (std::size_t i = 2; i < 6; ++i) discarded += values[i] * values[i];
  EXPECT_NEAR(tbm::frobeniusNorm(a - tbm::bestRankR(a, 2)), std::sqrt(discarded), 1e-12);
}

TEST(SpectralNorm, KnownValues) {
  DenseMatrix d(3, 3);
  d(0, 0) = 1;
  d(1, 1) = 2;
  d(2, 2) = 3;
  EXPECT_NEAR(tbm::spectralNorm(d), 3.0, 1e-9);
  EXPECT_EQ(tbm::spectralNorm(DenseMatrix(3, 4)), 0.0);
}

TEST(SpectralNorm, MatchesEigenOracle) {
  std::mt19937_64 gen(24);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = oracle::randomMatrix(8, 5, gen);
    const auto ata = oracle::matmul(a.transposed(), a);
    const double expected = std::sqrt(tbm::symEigen(ata).values.back());
    EXPECT_NEAR(tbm::spectralNorm(a), expected, 1e-8 * expected);
  }
}

TEST(Gram, MatchesDirectProductAndIsSymmetric) {
  std::mt19937_64 gen(25);
  auto a = oracle::randomMatrix(7, 30, gen);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (i % 3) a.data()[i] = 0.0;  // sparse pattern
  const auto g = tbm::gram(a);
  EXPECT_LT(oracle::maxAbsDiff(g.data(), oracle::gram(a).data()), 1e-12);
  EXPECT_EQ(g, g.transposed());

  const auto pair = tbm::gramWithAbsolute(a);
  EXPECT_EQ(pair.plain, g);
  DenseMatrix abs_a = a;
  for (double& v : abs_a.data()) v = std::abs(v);
  EXPECT_LT(oracle::maxAbsDiff(pair.absolute.data(), oracle::gram(abs_a).data()), 1e-12);
}
