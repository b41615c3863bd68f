#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "tbm/algorithms.hpp"
#include "tbm/logistic.hpp"
#include "tbm/model.hpp"

namespace tbm {

/// `count` points geometrically spaced from lo to hi inclusive.
std::vector<double> logSpaced(double lo, double hi, std::size_t count);

/// Rounded logSpaced values with duplicates removed.
std::vector<std::size_t> logSpacedIntegers(std::size_t lo, std::size_t hi, std::size_t count);

/// Phase-transition grid over (n, rho). Every cell samples a symmetric model
/// (the same balanced labels on every mode) with the given core.
struct SweepGrid {
  std::vector<std::size_t> nValues;
  std::vector<double> rhoValues;
  std::size_t replicates = 5;
  std::vector<std::string> algorithms;
  DenseTensor core;
  NoiseFamily noise = NoiseFamily::Bernoulli;
  std::uint64_t masterSeed = 0;
  double accuracyThreshold = 0.9;
  double cTrim = 3.0;
  HscInitializer hscInitializer = HscInitializer::VanillaSvd;
  std::size_t kmeansRestarts = 10;
  /// Wall-clock timings differ between runs; off by default so that the CSV
  /// is reproducible byte for byte (wall_ms is then written as 0).
  bool recordWallTime = false;

  void validate() const;
  std::size_t cellCount() const noexcept {
    return nValues.size() * rhoValues.size() * replicates * algorithms.size();
  }
};

struct CellResult {
  std::size_t n = 0;
  double rho = 0.0;
  std::size_t replicate = 0;
  std::string algorithm;
  double accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN when the cell failed
  double wallMs = 0.0;
  std::uint64_t seed = 0;
};

/// Seed of cell (nIndex, rhoIndex, replicate, algorithmIndex); drives k-means.
std::uint64_t cellSeed(std::uint64_t masterSeed, std::size_t nIndex, std::size_t rhoIndex,
                       std::size_t replicate, std::size_t algorithmIndex) noexcept;

/// Seed of the tensor sampled for (nIndex, rhoIndex, replicate). All
/// algorithms of a replicate see the same sample.
std::uint64_t sampleSeed(std::uint64_t masterSeed, std::size_t nIndex, std::size_t rhoIndex,
                         std::size_t replicate) noexcept;

/// Runs every cell on `jobs` worker threads. Results are ordered by
/// (n index, rho index, replicate, algorithm index) and do not depend on
/// `jobs`. A cell that throws is recorded with NaN accuracy.
std::vector<CellResult> runSweep(const SweepGrid& grid, std::size_t jobs = 1);

void writeCsv(std::ostream& out, const std::vector<CellResult>& results);
std::vector<CellResult> readCsv(std::istream& in);

struct BoundaryFit {
  std::string algorithm;
  double gammaHat = 0.0;
  double intercept = 0.0;            // C in log rho = C - gamma log n
  std::vector<double> weights;       // (w0, w1, w2) on (1, log n, log rho)
  std::size_t nCells = 0;            // finite cells used in the fit
  std::size_t nExcluded = 0;         // NaN cells skipped
  std::size_t nPositive = 0;
  double threshold = 0.9;
  bool converged = false;
  std::size_t iterations = 0;
  double gradientNorm = 0.0;
  double waldStatistic = 0.0;
  /// Wald test of (w1, w2) = 0 at the 1% level (chi-square, 2 dof). False
  /// means the labels carry little signal and gammaHat is not meaningful.
  bool reliable = false;
};

inline constexpr double kWaldCritical2Dof = 9.21;

/// Logistic boundary in (log n, log rho) for one algorithm's cells. Throws
/// DegenerateLabelsError when every cell falls on one side of the threshold
/// and FitConvergenceError when Newton iterations stall.
BoundaryFit fitBoundary(const std::vector<CellResult>& results, const std::string& algorithm,
                        double threshold, const LogisticOptions& options = {});

struct EmbeddingStudyConfig {
  std::size_t n = 200;
  std::vector<double> rhoValues;
  DenseTensor core = cores::embeddingStudy();
  NoiseFamily noise = NoiseFamily::Bernoulli;
  std::uint64_t masterSeed = 0;
  double cTrim = 3.0;
};

struct EmbeddingSnapshot {
  double rho = 0.0;
  std::uint64_t seed = 0;
  Labels truth;
  DenseMatrix hollowSvd;  // rows of U Lambda from the trimmed hollow Gram
  DenseMatrix hsc;        // one projection step started from hollowSvd's factor
  double hollowSvdProbe = 0.0;
  double hscProbe = 0.0;
};

/// Two-dimensional embeddings per rho for plotting; no clustering step.
std::vector<EmbeddingSnapshot> embeddingStudy(const EmbeddingStudyConfig& cfg);

/// In-sample accuracy of a logistic classifier on standardized features.
/// Labels must take values in {0, 1}.
double probeAccuracy(const DenseMatrix& embedding, const Labels& labels);

/// Tab-separated table with header node, true_label, x, y, rho. Nodes and
/// labels are written one-based.
void writeEmbeddingTsv(std::ostream& out, const std::vector<EmbeddingSnapshot>& snapshots, bool hsc);

}  // namespace tbm
