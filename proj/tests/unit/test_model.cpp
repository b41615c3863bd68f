#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tbm/linalg.hpp"
#include "tbm/model.hpp"

using tbm::DenseTensor;
using tbm::NoiseFamily;
using tbm::TbmSpec;

namespace {

TbmSpec randomSpec(std::mt19937_64& gen, std::vector<std::size_t> dims, std::vector<std::size_t> ranks,
                   NoiseFamily noise) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TbmSpec spec;
  spec.rho = 0.2 + 0.6 * u(gen);
  spec.noise = noise;
  spec.core = DenseTensor(ranks);
  for (double& v : spec.core.data()) v = u(gen);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    tbm::Labels z(dims[k]);
    for (std::size_t i = 0; i < dims[k]; ++i) z[i] = i < ranks[k] ? i : gen() % ranks[k];
    std::shuffle(z.begin(), z.end(), gen);
    spec.memberships.push_back(z);
  }
  spec.validate();
  return spec;
}

}  // namespace

TEST(SignalTensor, ZeroDensityGivesZeroTensor) {
  const auto spec = tbm::symmetricSpec(0.0, tbm::cores::informative(), 5, NoiseFamily::Bernoulli);
  const auto x = tbm::signalTensor(spec);
  for (double v : x.data()) EXPECT_EQ(v, 0.0);
}

TEST(SignalTensor, InformativeBlocks) {
  TbmSpec spec;
  spec.rho = 0.5;
  spec.core = tbm::cores::informative();
  spec.memberships.assign(3, tbm::Labels{0, 0, 1, 1});
  const auto x = tbm::signalTensor(spec);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t l = 0; l < 4; ++l) {
        const bool block = (i < 2 && j < 2 && l < 2) || (i >= 2 && j >= 2 && l >= 2);
        EXPECT_EQ(x.at({i, j, l}), block ? 0.5 : 0.0);
      }
}

TEST(SignalTensor, AgreesWithTuckerOfMembershipMatrices) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = randomSpec(gen, {5, 4, 6}, {2, 3, 2}, NoiseFamily::Bernoulli);
    std::vector<tbm::DenseMatrix> z;
    for (std::size_t k = 0; k < 3; ++k) z.push_back(tbm::membershipMatrix(spec.memberships[k], spec.core.extent(k)));
    DenseTensor scaled = spec.core;
    for (double& v : scaled.data()) v *= spec.rho;
    const auto expected = tbm::tuckerAssemble(scaled, z);
    EXPECT_LT(oracle::maxAbsDiff(tbm::signalTensor(spec).data(), expected.data()), 1e-15);
  }
}

TEST(Sample, ZeroDensityIsZero) {
  const auto spec = tbm::symmetricSpec(0.0, tbm::cores::uninformative(), 6, NoiseFamily::Bernoulli);
  const auto y = tbm::sample(spec, 5);
  for (double v : y.data()) EXPECT_EQ(v, 0.0);
}

TEST(Sample, DegenerateBernoulliIsAllOnes) {
  const auto spec = tbm::symmetricSpec(1.0, DenseTensor({2, 2}, 1.0), 5, NoiseFamily::Bernoulli);
  const auto y = tbm::sample(spec, 5);
  for (double v : y.data()) EXPECT_EQ(v, 1.0);
}

TEST(Sample, DeterministicPerSeed) {
  const auto spec = tbm::symmetricSpec(0.3, tbm::cores::uninformative(), 8, NoiseFamily::Poisson);
  EXPECT_EQ(tbm::sample(spec, 17), tbm::sample(spec, 17));
  EXPECT_NE(tbm::sample(spec, 17), tbm::sample(spec, 18));
}

TEST(Sample, AggregatedSpecCannotBeSampled) {
  auto spec = tbm::symmetricSpec(0.3, tbm::cores::uninformative(), 4, NoiseFamily::Bernoulli);
  EXPECT_THROW(tbm::sample(tbm::aggregateSpec(spec, 2), 1), std::invalid_argument);
}

TEST(Sample, MonteCarloMeansMatchSignal) {
  std::mt19937_64 gen(12);
  for (NoiseFamily noise : {NoiseFamily::Bernoulli, NoiseFamily::Poisson}) {
    auto spec = randomSpec(gen, {3, 2, 2}, {2, 2, 1}, noise);
    if (noise == NoiseFamily::Poisson) spec.rho *= 20.0;  // exercise the large-mean sampler too
    const auto x = tbm::signalTensor(spec);
    const std::size_t reps = 10000;
    std::vector<double> sum(x.size(), 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto y = tbm::sample(spec, 1000 + r);
      for (std::size_t i = 0; i < y.size(); ++i) sum[i] += y.data()[i];
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double m = x.data()[i];
      const double var = noise == NoiseFamily::Bernoulli ? m * (1 - m) : m;
      const double se = std::sqrt(var / reps);
      EXPECT_NEAR(sum[i] / reps, m, 4.0 * se + 1e-12) << tbm::toString(noise) << " entry " << i;
    }
  }
}

TEST(Validate, RejectsOutOfRangeBernoulliMeans) {
  EXPECT_THROW(tbm::symmetricSpec(1.5, tbm::cores::informative(), 4, NoiseFamily::Bernoulli), std::invalid_argument);
  EXPECT_NO_THROW(tbm::symmetricSpec(1.5, tbm::cores::informative(), 4, NoiseFamily::Poisson));
  TbmSpec bad;
  bad.rho = 0.1;
  bad.core = DenseTensor({2, 2}, 1.0);
  bad.memberships = {{0, 2}, {0, 1}};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Diagnostics, SeparationAndBalance) {
  EXPECT_EQ(tbm::modeSeparation(DenseTensor({2, 2}, 1.0), 0), 0.0);
  EXPECT_NEAR(tbm::modeSeparation(tbm::cores::informative(), 0), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_TRUE(std::isinf(tbm::modeSeparation(DenseTensor({1, 2}, 1.0), 0)));
  EXPECT_EQ(tbm::modeBalance(tbm::balancedLabels(12, 3), 3), 1.0);
  EXPECT_NEAR(tbm::modeBalance(tbm::Labels{0, 0, 0, 1}, 2), 0.5, 1e-15);
  const auto diag = tbm::diagnostics([] {
    TbmSpec s;
    s.rho = 0.1;
    s.core = DenseTensor({3, 2}, 0.5);
    s.memberships = {{0, 0, 1, 1}, {0, 1}};
    return s;
  }());
  EXPECT_EQ(diag.balances[0], 0.0);
  EXPECT_FALSE(diag.warnings.empty());
}

TEST(AggregateSpec, TrailingRankOneKeepsCoreSlice) {
  TbmSpec spec;
  spec.rho = 0.01;
  spec.core = DenseTensor({2, 2, 1}, {0.1, 0.2, 0.3, 0.4});
  spec.memberships = {{0, 1, 1}, {1, 0}, {0, 0, 0, 0, 0}};
  const auto agg = tbm::aggregateSpec(spec, 2);
  EXPECT_DOUBLE_EQ(agg.rho, 0.05);
  EXPECT_EQ(agg.core, DenseTensor({2, 2}, {0.1, 0.2, 0.3, 0.4}));
  EXPECT_EQ(agg.noise, NoiseFamily::Aggregated);
}

TEST(AggregateSpec, UninformativeCoreAveragesToConstant) {
  const auto spec = tbm::symmetricSpec(0.01, tbm::cores::uninformative(), 10, NoiseFamily::Bernoulli);
  const auto agg = tbm::aggregateSpec(spec, 2);
  for (double v : agg.core.data()) EXPECT_DOUBLE_EQ(v, 0.5);
  const auto inf = tbm::aggregateSpec(tbm::symmetricSpec(0.01, tbm::cores::informative(), 10, NoiseFamily::Bernoulli), 2);
  EXPECT_EQ(inf.core, DenseTensor({2, 2}, {0.5, 0.0, 0.0, 0.5}));
  // Aggregated signal is rho' S' with rho' = n rho.
  const auto a = tbm::aggregateModes(tbm::signalTensor(spec), 2);
  for (double v : a.data()) EXPECT_NEAR(v, 10 * 0.01 * 0.5, 1e-15);
}

TEST(AggregateSpec, MeanConsistencyOnRandomSpecs) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto spec = randomSpec(gen, {4, 3, 5, 2}, {2, 2, 3, 2}, NoiseFamily::Poisson);
    for (std::size_t keep = 1; keep < 4; ++keep) {
      const auto lhs = tbm::aggregateModes(tbm::signalTensor(spec), keep);
      const auto rhs = tbm::signalTensor(tbm::aggregateSpec(spec, keep));
      const double scale = tbm::maxAbs(lhs.data());
      EXPECT_LE(oracle::maxAbsDiff(lhs.data(), rhs.data()), 1e-12 * scale);
    }
  }
}

TEST(TailBounds, BennettBetaProperties) {
  for (double s2 : {0.01, 0.5, 3.0, 40.0}) {
    EXPECT_EQ(tbm::bennettBeta(0.0, s2), 1.0);
    double prev = 1.0;
    for (int i = 1; i <= 200; ++i) {
      const double t = 0.05 * i;
      const double b = tbm::bennettBeta(t, s2);
      EXPECT_LT(b, prev);
      EXPECT_LE(b, std::pow(std::exp(1.0) * s2 / t, t) * (1 + 1e-12));
      prev = b;
    }
  }
  EXPECT_THROW(tbm::bennettBeta(-1.0, 1.0), std::domain_error);
}

TEST(TailBounds, OrderingAndZero) {
  const auto z = tbm::tailBounds(0.0, 2.0);
  EXPECT_EQ(z.bennett, 1.0);
  EXPECT_EQ(z.bernstein1, 1.0);
  EXPECT_EQ(z.bernstein2, 1.0);
  std::mt19937_64 gen(14);
  std::uniform_real_distribution<double> lt(-3, 3);
  for (int i = 0; i < 2000; ++i) {
    const auto b = tbm::tailBounds(std::pow(10.0, lt(gen)), std::pow(10.0, lt(gen)));
    EXPECT_LE(b.bennett, b.bernstein1 * (1 + 1e-12));
    EXPECT_LE(b.bernstein1, b.bernstein2 * (1 + 1e-12));
  }
}

TEST(TailBounds, PoissonTailBelowBennett) {
  const double s2 = 2.0;
  tbm::SplitMix64 rng(15);
  const int n = 100000;
  std::vector<std::uint64_t> draws(n);
  for (auto& d : draws) d = tbm::samplePoisson(s2, rng);
  for (double t : {0.5, 1.0, 2.0, 4.0, 6.0}) {
    const double tail =
        static_cast<double>(std::count_if(draws.begin(), draws.end(), [&](auto x) { return x - s2 >= t; })) / n;
    EXPECT_LE(tail, tbm::bennettBeta(t, s2));
  }
}

TEST(SeparationBound, GramRowDistanceOracle) {
  const auto spec = tbm::symmetricSpec(0.1, tbm::cores::informative(), 20, NoiseFamily::Bernoulli);
  const double bound = tbm::separationLowerBound(spec, 0);
  const auto g = oracle::gram(oracle::matricize(tbm::signalTensor(spec), 0));
  const auto& z = spec.memberships[0];
  double min_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) {
      if (z[i] == z[j]) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < 20; ++c) s += (g(i, c) - g(j, c)) * (g(i, c) - g(j, c));
      min_dist = std::min(min_dist, std::sqrt(s));
    }
  EXPECT_GT(bound, 0.0);
  EXPECT_GE(min_dist, bound);

  const auto doubled = tbm::symmetricSpec(0.2, tbm::cores::informative(), 20, NoiseFamily::Bernoulli);
  EXPECT_NEAR(tbm::separationLowerBound(doubled, 0), 4.0 * bound, 1e-12 * bound);
  const auto zero = tbm::symmetricSpec(0.0, tbm::cores::informative(), 20, NoiseFamily::Bernoulli);
  EXPECT_EQ(tbm::separationLowerBound(zero, 0), 0.0);
}

TEST(KMeansBound, Formula) {
  EXPECT_EQ(tbm::kmeansMisclassBound(0.0, 2, 50, 1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(tbm::kmeansMisclassBound(0.3, 3, 40, 2.0, 1.5), 128.0 * 1.5 * 3 * 0.09 / (40 * 4.0));
  EXPECT_TRUE(tbm::kmeansBoundApplies(0.0, 2, 1, 1.0, 2.0));
  EXPECT_FALSE(tbm::kmeansBoundApplies(1.0, 2, 10, 1.0, 2.0));
  EXPECT_THROW(tbm::kmeansMisclassBound(1.0, 2, 10, 0.0, 2.0), std::domain_error);
}
