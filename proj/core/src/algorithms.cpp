#include "tbm/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tbm {

namespace {

double densityEstimate(const DenseTensor& y, const TrimSettings& trim) {
  if (trim.rho) return *trim.rho;
  double s = 0.0;
  for (double v : y.data()) s += std::abs(v);
  return s / static_cast<double>(y.size());
}

ClusterAssignment clusterRows(const DenseMatrix& embedding, std::size_t clusters, const KMeansConfig& kmeans) {
  KMeansOptions options;
  options.restarts = kmeans.restarts;
  return kmeansPlusPlus(embedding, clusters, kmeans.seed, options);
}

void checkClusters(const DenseTensor& y, std::size_t mode, std::size_t clusters) {
  if (mode >= y.order()) {
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range for order-" +
                            std::to_string(y.order()) + " tensor");
  }
  if (clusters < 1 || clusters > y.extent(mode)) {
    throw std::invalid_argument("cluster count " + std::to_string(clusters) + " outside [1, " +
                                std::to_string(y.extent(mode)) + "]");
  }
}

}  // namespace

double hollowTrimThreshold(const DenseTensor& y, const TrimSettings& trim) {
  if (trim.tau) return *trim.tau;
  const double rho = densityEstimate(y, trim);
  return trim.cTrim * rho * rho * static_cast<double>(y.size());
}

double aggregateTrimThreshold(const DenseTensor& y, const TrimSettings& trim) {
  if (trim.tau) return *trim.tau;
  const double rho = densityEstimate(y, trim);
  return trim.cTrim * rho * static_cast<double>(y.size() / y.extent(0));
}

HollowGram hollowGram(const DenseTensor& y, std::size_t mode, double tau) {
  if (!(tau >= 0.0)) throw std::invalid_argument("trimming threshold must be nonnegative");
  const DenseMatrix unfolded = matricize(y, mode);
  auto grams = gramWithAbsolute(unfolded);
  DenseMatrix& a = grams.plain;
  DenseMatrix& a_abs = grams.absolute;
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 0.0;
    a_abs(i, i) = 0.0;
  }

  std::vector<bool> row_bad(n), col_bad(n);
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    double col_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row_sum += a_abs(i, j);
      col_sum += a_abs(j, i);
    }
    row_bad[i] = row_sum > tau;
    col_bad[i] = col_sum > tau;
  }

  HollowGram out;
  out.tau = tau;
  out.trimmed.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.trimmed[i] = row_bad[i] || col_bad[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (row_bad[i] || col_bad[j]) a(i, j) = 0.0;
    }
  }
  out.matrix = std::move(a);
  return out;
}

DenseMatrix spectralEmbedding(const DenseMatrix& symmetric, std::size_t r) {
  return scaledEigenvectors(topByAbs(symEigen(symmetric), r));
}

DenseMatrix lowRankRowEmbedding(const DenseMatrix& m, std::size_t r) {
  auto top = topByAbs(symEigen(gram(m)), r);
  for (double& v : top.values) v = std::sqrt(std::max(v, 0.0));
  return scaledEigenvectors(top);
}

DenseMatrix hollowSvdEmbedding(const DenseTensor& y, const HollowSvdConfig& cfg) {
  checkClusters(y, cfg.mode, cfg.clusters);
  if (!(cfg.relaxation > 1.0)) throw std::invalid_argument("relaxation constant Q must exceed 1");
  const double tau = hollowTrimThreshold(y, cfg.trim);
  return spectralEmbedding(hollowGram(y, cfg.mode, tau).matrix, cfg.clusters);
}

ClusterAssignment hollowSvdCluster(const DenseTensor& y, const HollowSvdConfig& cfg) {
  return clusterRows(hollowSvdEmbedding(y, cfg), cfg.clusters, cfg.kmeans);
}

ClusterAssignment vanillaSvdCluster(const DenseTensor& y, std::size_t mode, std::size_t clusters,
                                    const KMeansConfig& kmeans) {
  checkClusters(y, mode, clusters);
  const DenseMatrix a = gram(matricize(y, mode));
  return clusterRows(spectralEmbedding(a, clusters), clusters, kmeans);
}

HscEmbedding hscEmbedding(const DenseTensor& y, const HscConfig& cfg) {
  checkClusters(y, cfg.mode, cfg.clusters);
  if (y.order() < 2) throw std::invalid_argument("HSC needs a tensor of order at least 2");
  const std::size_t nk = y.extent(cfg.mode);
  for (std::size_t l = 0; l < y.order(); ++l) {
    if (y.extent(l) != nk) {
      throw DimensionError("HSC reuses one factor on every mode and needs equal extents, got " +
                           formatDims(y.dims()));
    }
  }

  DenseMatrix initial_gram;
  if (cfg.initializer == HscInitializer::VanillaSvd) {
    initial_gram = gram(matricize(y, cfg.mode));
  } else {
    initial_gram = hollowGram(y, cfg.mode, hollowTrimThreshold(y, cfg.trim)).matrix;
  }
  const auto top = topByAbs(symEigen(initial_gram), cfg.clusters);

  HscEmbedding out;
  out.factor = top.vectors;
  out.initial = scaledEigenvectors(top);

  const DenseMatrix projector = top.vectors.transposed();  // r x n
  DenseTensor core = y;
  for (std::size_t l = 0; l < y.order(); ++l) {
    if (l != cfg.mode) core = modeProduct(core, projector, l);
  }
  const DenseMatrix m = matricize(core, cfg.mode);  // n x r^{d-1}
  // Right singular vectors of m from its small Gram; m V = U Sigma.
  const auto right = topByAbs(symEigen(gram(m.transposed())), cfg.clusters);
  out.refined = m * right.vectors;
  return out;
}

ClusterAssignment hscCluster(const DenseTensor& y, const HscConfig& cfg) {
  return clusterRows(hscEmbedding(y, cfg).refined, cfg.clusters, cfg.kmeans);
}

DenseMatrix trimmedAggregate(const DenseTensor& y, double threshold) {
  if (y.order() < 2) throw std::invalid_argument("aggregate SVD needs a tensor of order at least 2");
  DenseMatrix a;
  if (y.order() == 2) {
    a = matricize(y, 0);
  } else {
    const DenseTensor agg = aggregateModes(y, 2);
    a = DenseMatrix(agg.extent(0), agg.extent(1), agg.values());
  }
  std::vector<bool> row_bad(a.rows()), col_bad(a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double v : a.row(i)) s += std::abs(v);
    row_bad[i] = s > threshold;
  }
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += std::abs(a(i, j));
    col_bad[j] = s > threshold;
  }
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (row_bad[i] || col_bad[j]) a(i, j) = 0.0;
  return a;
}

ClusterAssignment aggregateSvdCluster(const DenseTensor& y, const AggregateSvdConfig& cfg) {
  if (y.order() < 2) throw std::invalid_argument("aggregate SVD needs a tensor of order at least 2");
  checkClusters(y, 0, cfg.clusters);
  const DenseMatrix a = trimmedAggregate(y, aggregateTrimThreshold(y, cfg.trim));
  return clusterRows(lowRankRowEmbedding(a, cfg.clusters), cfg.clusters, cfg.kmeans);
}

const std::vector<std::string>& pipelineNames() {
  static const std::vector<std::string> names{"hollow-svd", "vanilla-svd", "hsc", "aggregate-svd"};
  return names;
}

std::string_view pipelineName(Pipeline p) {
  switch (p) {
    case Pipeline::HollowSvd: return "hollow-svd";
    case Pipeline::VanillaSvd: return "vanilla-svd";
    case Pipeline::Hsc: return "hsc";
    case Pipeline::AggregateSvd: return "aggregate-svd";
  }
  return "unknown";
}

Pipeline parsePipeline(std::string_view name) {
  if (name == "hollow-svd") return Pipeline::HollowSvd;
  if (name == "vanilla-svd") return Pipeline::VanillaSvd;
  if (name == "hsc") return Pipeline::Hsc;
  if (name == "aggregate-svd") return Pipeline::AggregateSvd;
  std::string valid;
  for (const auto& n : pipelineNames()) valid += (valid.empty() ? "" : ", ") + n;
  throw UnknownPipelineError("unknown algorithm '" + std::string(name) + "'; valid names: " + valid);
}

ClusterAssignment runPipeline(Pipeline p, const DenseTensor& y, const PipelineParams& params) {
  switch (p) {
    case Pipeline::HollowSvd: {
      HollowSvdConfig cfg;
      cfg.mode = params.mode;
      cfg.clusters = params.clusters;
      cfg.trim = params.trim;
      cfg.kmeans = params.kmeans;
      return hollowSvdCluster(y, cfg);
    }
    case Pipeline::VanillaSvd:
      return vanillaSvdCluster(y, params.mode, params.clusters, params.kmeans);
    case Pipeline::Hsc: {
      HscConfig cfg;
      cfg.mode = params.mode;
      cfg.clusters = params.clusters;
      cfg.initializer = params.hscInitializer;
      cfg.trim = params.trim;
      cfg.kmeans = params.kmeans;
      return hscCluster(y, cfg);
    }
    case Pipeline::AggregateSvd: {
      if (params.mode != 0) throw std::invalid_argument("aggregate SVD clusters the first mode only");
      AggregateSvdConfig cfg;
      cfg.clusters = params.clusters;
      cfg.trim = params.trim;
      cfg.kmeans = params.kmeans;
      return aggregateSvdCluster(y, cfg);
    }
  }
  throw std::logic_error("unhandled pipeline");
}

}  // namespace tbm
