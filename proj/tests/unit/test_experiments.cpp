#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tbm/experiments.hpp"

using tbm::CellResult;

namespace {

tbm::SweepGrid smallGrid() {
  tbm::SweepGrid g;
  g.nValues = {20, 30};
  g.rhoValues = {0.05, 0.2};
  g.replicates = 2;
  g.algorithms = {"hollow-svd", "vanilla-svd", "hsc", "aggregate-svd"};
  g.core = tbm::cores::informative();
  g.masterSeed = 17;
  return g;
}

// Cells whose success follows a planted boundary log rho = c - gamma log n,
// with logistic label noise of the given scale.
std::vector<CellResult> plantedCells(double gamma, double c, double noiseScale, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<CellResult> cells;
  for (double x = std::log(20.0); x <= std::log(400.0); x += 0.05)
    for (double logrho = -9.0; logrho <= -1.0; logrho += 0.05) {
      CellResult r;
      r.n = static_cast<std::size_t>(std::lround(std::exp(x)));
      r.rho = std::exp(logrho);
      r.algorithm = "alg";
      const double margin = logrho - (c - gamma * std::log(static_cast<double>(r.n)));
      const double p = 1.0 / (1.0 + std::exp(-margin / noiseScale));
      r.accuracy = u(gen) < p ? 1.0 : 0.6;
      cells.push_back(r);
    }
  return cells;
}

}  // namespace

TEST(LogSpaced, EndpointsAndRatios) {
  const auto v = tbm::logSpaced(0.002, 0.027, 10);
  ASSERT_EQ(v.size(), 10u);
  EXPECT_DOUBLE_EQ(v.front(), 0.002);
  EXPECT_NEAR(v.back(), 0.027, 1e-15);
  for (std::size_t i = 2; i < v.size(); ++i) EXPECT_NEAR(v[i] / v[i - 1], v[1] / v[0], 1e-12);
  EXPECT_EQ(tbm::logSpaced(3.0, 3.0, 1), std::vector<double>{3.0});
  const auto n = tbm::logSpacedIntegers(30, 180, 10);
  EXPECT_EQ(n.front(), 30u);
  EXPECT_EQ(n.back(), 180u);
  EXPECT_TRUE(std::is_sorted(n.begin(), n.end()));
}

TEST(Sweep, SingleCellProducesOneRow) {
  tbm::SweepGrid g;
  g.nValues = {24};
  g.rhoValues = {0.3};
  g.replicates = 1;
  g.algorithms = {"hollow-svd"};
  g.core = tbm::cores::informative();
  const auto res = tbm::runSweep(g);
  ASSERT_EQ(res.size(), 1u);
  EXPECT_EQ(res[0].n, 24u);
  EXPECT_EQ(res[0].algorithm, "hollow-svd");
  EXPECT_GE(res[0].accuracy, 0.5);
  EXPECT_LE(res[0].accuracy, 1.0);
  EXPECT_EQ(res[0].seed, tbm::cellSeed(0, 0, 0, 0, 0));
}

TEST(Sweep, ResultsIndependentOfThreadCount) {
  const auto g = smallGrid();
  const auto a = tbm::runSweep(g, 1);
  const auto b = tbm::runSweep(g, 4);
  ASSERT_EQ(a.size(), g.cellCount());
  std::ostringstream sa, sb;
  tbm::writeCsv(sa, a);
  tbm::writeCsv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  // Order is (n, rho, replicate, algorithm).
  EXPECT_EQ(a[0].n, 20u);
  EXPECT_EQ(a[1].algorithm, "vanilla-svd");
  EXPECT_EQ(a[4].replicate, 1u);
  EXPECT_EQ(a.back().n, 30u);
}

TEST(Sweep, ValidationRejectsBadGrids) {
  auto g = smallGrid();
  g.algorithms = {"nope"};
  EXPECT_THROW(g.validate(), tbm::UnknownPipelineError);
  g = smallGrid();
  g.accuracyThreshold = 1.0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = smallGrid();
  g.rhoValues = {3.0};  // rho * S > 1 under Bernoulli noise
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = smallGrid();
  g.nValues = {};
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(Csv, RoundTripPreservesEveryField) {
  std::vector<CellResult> cells(3);
  cells[0] = {30, 0.0123456789012345, 0, "hsc", 0.9666666666666667, 0.0, 123456789012345ull};
  cells[1] = {180, 0.027, 4, "aggregate-svd", std::numeric_limits<double>::quiet_NaN(), 1.5, 1};
  cells[2] = {45, 1e-3, 2, "hollow-svd", 1.0, 0.0, ~std::uint64_t{0}};
  std::stringstream ss;
  tbm::writeCsv(ss, cells);
  const auto back = tbm::readCsv(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].n, cells[i].n);
    EXPECT_EQ(back[i].rho, cells[i].rho);
    EXPECT_EQ(back[i].replicate, cells[i].replicate);
    EXPECT_EQ(back[i].algorithm, cells[i].algorithm);
    EXPECT_EQ(back[i].seed, cells[i].seed);
    EXPECT_EQ(back[i].wallMs, cells[i].wallMs);
    if (std::isnan(cells[i].accuracy))
      EXPECT_TRUE(std::isnan(back[i].accuracy));
    else
      EXPECT_EQ(back[i].accuracy, cells[i].accuracy);
  }
}

TEST(Csv, RejectsMalformedInput) {
  std::istringstream bad_header("n,rho\n");
  EXPECT_THROW(tbm::readCsv(bad_header), std::invalid_argument);
  std::istringstream bad_row("n,rho,replicate,algorithm,accuracy,wall_ms,seed\n1,2,3\n");
  EXPECT_THROW(tbm::readCsv(bad_row), std::invalid_argument);
}

TEST(Boundary, RecoversPlantedSlope) {
  const auto cells = plantedCells(1.5, 2.0, 0.02, 51);
  const auto fit = tbm::fitBoundary(cells, "alg", 0.9);
  EXPECT_NEAR(fit.gammaHat, 1.5, 0.01);
  EXPECT_NEAR(fit.intercept, 2.0, 0.05);
  EXPECT_TRUE(fit.converged);
  EXPECT_TRUE(fit.reliable);
  EXPECT_EQ(fit.nCells, cells.size());
}

TEST(Boundary, NoSignalIsFlaggedUnreliable) {
  std::mt19937_64 gen(52);
  auto cells = plantedCells(1.5, 2.0, 0.02, 53);
  for (auto& c : cells) c.accuracy = (gen() % 2) ? 1.0 : 0.6;
  cells.resize(400);
  const auto fit = tbm::fitBoundary(cells, "alg", 0.9);
  EXPECT_FALSE(fit.reliable);
  EXPECT_LT(fit.waldStatistic, tbm::kWaldCritical2Dof);
}

TEST(Boundary, RhoScalingShiftsInterceptOnly) {
  const auto cells = plantedCells(1.3, 1.0, 0.3, 54);
  auto scaled = cells;
  for (auto& c : scaled) c.rho *= 0.1;
  const auto a = tbm::fitBoundary(cells, "alg", 0.9);
  const auto b = tbm::fitBoundary(scaled, "alg", 0.9);
  EXPECT_NEAR(a.gammaHat, b.gammaHat, 1e-6);
  EXPECT_NEAR(a.intercept + std::log(0.1), b.intercept, 1e-6);
}

TEST(Boundary, ExcludesNanAndFiltersAlgorithm) {
  auto cells = plantedCells(1.5, 2.0, 0.3, 55);
  const std::size_t total = cells.size();
  cells[0].accuracy = std::numeric_limits<double>::quiet_NaN();
  cells[1].algorithm = "other";
  const auto fit = tbm::fitBoundary(cells, "alg", 0.9);
  EXPECT_EQ(fit.nCells, total - 2);
  EXPECT_EQ(fit.nExcluded, 1u);
}

TEST(Boundary, DegenerateLabelsThrow) {
  auto cells = plantedCells(1.5, 2.0, 0.3, 56);
  for (auto& c : cells) c.accuracy = 1.0;
  EXPECT_THROW(tbm::fitBoundary(cells, "alg", 0.9), tbm::DegenerateLabelsError);
  EXPECT_THROW(tbm::fitBoundary(cells, "missing", 0.9), std::invalid_argument);
}

TEST(Embedding, ZeroDensityGivesOrigin) {
  tbm::EmbeddingStudyConfig cfg;
  cfg.n = 40;
  cfg.rhoValues = {0.0};
  const auto snaps = tbm::embeddingStudy(cfg);
  ASSERT_EQ(snaps.size(), 1u);
  for (double v : snaps[0].hollowSvd.data()) EXPECT_EQ(v, 0.0);
  for (double v : snaps[0].hsc.data()) EXPECT_EQ(v, 0.0);
}

TEST(Embedding, DenseRegimeIsLinearlySeparable) {
  tbm::EmbeddingStudyConfig cfg;
  cfg.n = 60;
  cfg.rhoValues = {0.5};
  cfg.masterSeed = 3;
  const auto snaps = tbm::embeddingStudy(cfg);
  EXPECT_GT(snaps[0].hollowSvdProbe, 0.99);
  EXPECT_GT(snaps[0].hscProbe, 0.99);
  std::ostringstream os;
  tbm::writeEmbeddingTsv(os, snaps, true);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "node\ttrue_label\tx\ty\trho");
  std::size_t lines = 0;
  for (std::string line; std::getline(is, line);) ++lines;
  EXPECT_EQ(lines, 60u);
}
