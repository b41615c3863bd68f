#include "tbm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tbm/rng.hpp"

namespace tbm {

namespace {

std::string formatNumber(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> splitLine(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

double parseDouble(const std::string& s, std::size_t lineNo) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument("CSV line " + std::to_string(lineNo) + ": not a number: '" + s + "'");
  }
  return v;
}

std::uint64_t parseUnsigned(const std::string& s, std::size_t lineNo) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s.front() == '-' || end != s.c_str() + s.size()) {
    throw std::invalid_argument("CSV line " + std::to_string(lineNo) + ": not an unsigned integer: '" + s + "'");
  }
  return v;
}

constexpr const char* kCsvHeader = "n,rho,replicate,algorithm,accuracy,wall_ms,seed";

}  // namespace

std::vector<double> logSpaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("logSpaced needs 0 < lo <= hi");
  }
  if (count == 0) throw std::invalid_argument("logSpaced needs count >= 1");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<std::size_t> logSpacedIntegers(std::size_t lo, std::size_t hi, std::size_t count) {
  std::vector<std::size_t> out;
  for (double v : logSpaced(static_cast<double>(lo), static_cast<double>(hi), count)) {
    out.push_back(static_cast<std::size_t>(std::llround(v)));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void SweepGrid::validate() const {
  if (nValues.empty() || rhoValues.empty()) throw std::invalid_argument("sweep grid: n and rho lists must be nonempty");
  if (algorithms.empty()) throw std::invalid_argument("sweep grid: no algorithms");
  if (replicates == 0) throw std::invalid_argument("sweep grid: replicates must be >= 1");
  if (!(accuracyThreshold > 0.5 && accuracyThreshold < 1.0)) {
    throw std::invalid_argument("sweep grid: accuracy threshold must lie in (0.5, 1)");
  }
  for (const auto& name : algorithms) parsePipeline(name);
  if (core.order() < 2) throw std::invalid_argument("sweep grid: core must have order >= 2");
  const std::size_t r = core.extent(0);
  for (std::size_t l = 0; l < core.order(); ++l) {
    if (core.extent(l) != r) throw std::invalid_argument("sweep grid: symmetric setting needs a cubical core");
  }
  for (std::size_t n : nValues) {
    if (n < r) throw std::invalid_argument("sweep grid: n = " + std::to_string(n) + " is smaller than r");
  }
  // Validating the spec at every rho catches Bernoulli means outside [0, 1].
  for (double rho : rhoValues) {
    symmetricSpec(rho, core, r, noise).validate();
  }
}

std::uint64_t cellSeed(std::uint64_t masterSeed, std::size_t nIndex, std::size_t rhoIndex, std::size_t replicate,
                       std::size_t algorithmIndex) noexcept {
  return deriveSeed(masterSeed, {nIndex, rhoIndex, replicate, algorithmIndex});
}

std::uint64_t sampleSeed(std::uint64_t masterSeed, std::size_t nIndex, std::size_t rhoIndex,
                         std::size_t replicate) noexcept {
  return deriveSeed(masterSeed, {nIndex, rhoIndex, replicate});
}

std::vector<CellResult> runSweep(const SweepGrid& grid, std::size_t jobs) {
  grid.validate();
  if (jobs == 0) throw std::invalid_argument("runSweep needs at least one job");

  std::vector<Pipeline> pipelines;
  for (const auto& name : grid.algorithms) pipelines.push_back(parsePipeline(name));
  const std::size_t n_alg = pipelines.size();
  const std::size_t n_rho = grid.rhoValues.size();
  const std::size_t n_rep = grid.replicates;
  const std::size_t tasks = grid.nValues.size() * n_rho * n_rep;
  std::vector<CellResult> results(tasks * n_alg);

  // One task samples a tensor and runs every algorithm on it.
  auto runTask = [&](std::size_t task) {
    const std::size_t rep = task % n_rep;
    const std::size_t ri = (task / n_rep) % n_rho;
    const std::size_t ni = task / (n_rep * n_rho);
    const std::size_t n = grid.nValues[ni];
    const double rho = grid.rhoValues[ri];

    for (std::size_t a = 0; a < n_alg; ++a) {
      CellResult& cell = results[task * n_alg + a];
      cell.n = n;
      cell.rho = rho;
      cell.replicate = rep;
      cell.algorithm = grid.algorithms[a];
      cell.seed = cellSeed(grid.masterSeed, ni, ri, rep, a);
    }

    TbmSpec spec;
    DenseTensor y;
    try {
      spec = symmetricSpec(rho, grid.core, n, grid.noise);
      y = sample(spec, sampleSeed(grid.masterSeed, ni, ri, rep));
    } catch (const std::exception&) {
      return;  // every algorithm of this replicate stays NaN
    }
    const Labels& truth = spec.memberships[0];
    const std::size_t r = grid.core.extent(0);

    for (std::size_t a = 0; a < n_alg; ++a) {
      CellResult& cell = results[task * n_alg + a];
      PipelineParams params;
      params.mode = 0;
      params.clusters = r;
      params.trim.rho = rho;
      params.trim.cTrim = grid.cTrim;
      params.hscInitializer = grid.hscInitializer;
      params.kmeans.seed = cell.seed;
      params.kmeans.restarts = grid.kmeansRestarts;
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto assignment = runPipeline(pipelines[a], y, params);
        cell.accuracy = 1.0 - misclassification(truth, assignment.labels, r);
      } catch (const std::exception&) {
        cell.accuracy = std::numeric_limits<double>::quiet_NaN();
      }
      if (grid.recordWallTime) {
        cell.wallMs = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      }
    }
  };

  const std::size_t workers = std::min(jobs, tasks);
  if (workers <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) runTask(t);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) runTask(t);
    });
  }
  for (auto& th : pool) th.join();
  return results;
}

void writeCsv(std::ostream& out, const std::vector<CellResult>& results) {
  out << kCsvHeader << '\n';
  for (const auto& c : results) {
    out << c.n << ',' << formatNumber(c.rho) << ',' << c.replicate << ',' << c.algorithm << ','
        << formatNumber(c.accuracy) << ',' << formatNumber(c.wallMs) << ',' << c.seed << '\n';
  }
}

std::vector<CellResult> readCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw std::invalid_argument("unexpected CSV header '" + line + "'");
  std::vector<CellResult> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = splitLine(line, ',');
    if (f.size() != 7) {
      throw std::invalid_argument("CSV line " + std::to_string(line_no) + ": expected 7 fields, got " +
                                  std::to_string(f.size()));
    }
    CellResult c;
    c.n = static_cast<std::size_t>(parseUnsigned(f[0], line_no));
    c.rho = parseDouble(f[1], line_no);
    c.replicate = static_cast<std::size_t>(parseUnsigned(f[2], line_no));
    c.algorithm = f[3];
    c.accuracy = parseDouble(f[4], line_no);
    c.wallMs = parseDouble(f[5], line_no);
    c.seed = parseUnsigned(f[6], line_no);
    out.push_back(std::move(c));
  }
  return out;
}

BoundaryFit fitBoundary(const std::vector<CellResult>& results, const std::string& algorithm, double threshold,
                        const LogisticOptions& options) {
  BoundaryFit fit;
  fit.algorithm = algorithm;
  fit.threshold = threshold;

  std::vector<double> rows;
  std::vector<int> labels;
  for (const auto& c : results) {
    if (c.algorithm != algorithm) continue;
    if (std::isnan(c.accuracy)) {
      ++fit.nExcluded;
      continue;
    }
    if (c.n == 0 || !(c.rho > 0.0)) {
      throw std::invalid_argument("boundary fit needs n > 0 and rho > 0 (log coordinates)");
    }
    rows.insert(rows.end(), {1.0, std::log(static_cast<double>(c.n)), std::log(c.rho)});
    labels.push_back(c.accuracy >= threshold ? 1 : 0);
  }
  if (labels.empty()) throw std::invalid_argument("no finite cells for algorithm '" + algorithm + "'");
  fit.nCells = labels.size();
  fit.nPositive = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));

  const LogisticFit lr = fitLogistic(DenseMatrix(labels.size(), 3, std::move(rows)), labels, options);
  fit.weights = lr.weights;
  fit.converged = lr.converged;
  fit.iterations = lr.iterations;
  fit.gradientNorm = lr.gradientNorm;
  fit.waldStatistic = lr.waldStatistic;
  fit.reliable = lr.waldStatistic > kWaldCritical2Dof;
  const double w2 = lr.weights[2];
  if (w2 == 0.0) throw DegenerateLabelsError("fitted boundary does not depend on rho; slope undefined");
  fit.gammaHat = lr.weights[1] / w2;
  fit.intercept = -lr.weights[0] / w2;
  return fit;
}

double probeAccuracy(const DenseMatrix& embedding, const Labels& labels) {
  if (labels.size() != embedding.rows()) throw DimensionError("probe: label count does not match embedding rows");
  const std::size_t n = embedding.rows();
  const std::size_t p = embedding.cols();
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] > 1) throw std::invalid_argument("probe accuracy needs two classes");
    y[i] = static_cast<int>(labels[i]);
  }

  DenseMatrix x(n, p + 1, 1.0);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += embedding(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (embedding(i, j) - mean) * (embedding(i, j) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x(i, j + 1) = sd > 0.0 ? (embedding(i, j) - mean) / sd : 0.0;
  }

  std::vector<double> w;
  try {
    w = fitLogistic(x, y).weights;
  } catch (const FitConvergenceError& e) {
    w = e.lastIterate().weights;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int predicted = logisticProbability(w, x.row(i)) >= 0.5 ? 1 : 0;
    if (predicted == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

std::vector<EmbeddingSnapshot> embeddingStudy(const EmbeddingStudyConfig& cfg) {
  if (cfg.rhoValues.empty()) throw std::invalid_argument("embedding study needs at least one rho");
  std::vector<EmbeddingSnapshot> out;
  for (std::size_t idx = 0; idx < cfg.rhoValues.size(); ++idx) {
    EmbeddingSnapshot snap;
    snap.rho = cfg.rhoValues[idx];
    snap.seed = deriveSeed(cfg.masterSeed, {idx});
    const TbmSpec spec = symmetricSpec(snap.rho, cfg.core, cfg.n, cfg.noise);
    const DenseTensor y = sample(spec, snap.seed);

    HscConfig hsc;
    hsc.mode = 0;
    hsc.clusters = cfg.core.extent(0);
    hsc.initializer = HscInitializer::HollowSvd;
    hsc.trim.rho = snap.rho;
    hsc.trim.cTrim = cfg.cTrim;
    auto emb = hscEmbedding(y, hsc);

    snap.truth = spec.memberships[0];
    snap.hollowSvd = std::move(emb.initial);
    snap.hsc = std::move(emb.refined);
    if (hsc.clusters == 2) {
      snap.hollowSvdProbe = probeAccuracy(snap.hollowSvd, snap.truth);
      snap.hscProbe = probeAccuracy(snap.hsc, snap.truth);
    }
    out.push_back(std::move(snap));
  }
  return out;
}

void writeEmbeddingTsv(std::ostream& out, const std::vector<EmbeddingSnapshot>& snapshots, bool hsc) {
  out << "node\ttrue_label\tx\ty\trho\n";
  for (const auto& s : snapshots) {
    const DenseMatrix& e = hsc ? s.hsc : s.hollowSvd;
    if (e.cols() < 2) throw std::invalid_argument("embedding TSV needs two coordinates per node");
    for (std::size_t i = 0; i < e.rows(); ++i) {
      out << i + 1 << '\t' << s.truth[i] + 1 << '\t' << formatNumber(e(i, 0)) << '\t' << formatNumber(e(i, 1))
          << '\t' << formatNumber(s.rho) << '\n';
    }
  }
}

}  // namespace tbm
