#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tbm/cluster.hpp"
#include "tbm/linalg.hpp"
#include "tbm/tensor.hpp"

namespace tbm {

struct KMeansConfig {
  std::uint64_t seed = 0;
  std::size_t restarts = 10;
};

/// Trimming threshold resolution shared by the trimmed pipelines: an explicit
/// `tau` wins; otherwise tau = cTrim * rho^2 * (n_1...n_d) for the hollow
/// Gram and cTrim * rho * (n_1...n_d) / n_1 for the aggregate matrix, where rho
/// is the known density when given and the mean of |Y| otherwise.
struct TrimSettings {
  std::optional<double> tau;
  std::optional<double> rho;
  double cTrim = 3.0;
};

struct HollowSvdConfig {
  std::size_t mode = 0;
  std::size_t clusters = 2;
  TrimSettings trim;
  double relaxation = 2.0;  // Q > 1; k-means++ gives no per-run guarantee
  KMeansConfig kmeans;
};

/// Trimmed hollow Gram matrix of mat_k(Y) together with the indices whose
/// absolute hollow Gram row sum exceeded tau.
struct HollowGram {
  DenseMatrix matrix;
  std::vector<bool> trimmed;
  double tau = 0.0;
};

HollowGram hollowGram(const DenseTensor& y, std::size_t mode, double tau);
double hollowTrimThreshold(const DenseTensor& y, const TrimSettings& trim);
double aggregateTrimThreshold(const DenseTensor& y, const TrimSettings& trim);

/// Top-r eigenpairs by |lambda| of a symmetric matrix, as rows of U Lambda.
DenseMatrix spectralEmbedding(const DenseMatrix& symmetric, std::size_t r);

/// Rows of U_r Sigma_r from the best rank-r approximation of a general matrix
/// (pairwise row distances equal those of the approximation itself).
DenseMatrix lowRankRowEmbedding(const DenseMatrix& m, std::size_t r);

ClusterAssignment hollowSvdCluster(const DenseTensor& y, const HollowSvdConfig& cfg);
DenseMatrix hollowSvdEmbedding(const DenseTensor& y, const HollowSvdConfig& cfg);

ClusterAssignment vanillaSvdCluster(const DenseTensor& y, std::size_t mode, std::size_t clusters,
                                    const KMeansConfig& kmeans);

enum class HscInitializer { VanillaSvd, HollowSvd };

struct HscConfig {
  std::size_t mode = 0;
  std::size_t clusters = 2;
  HscInitializer initializer = HscInitializer::VanillaSvd;
  TrimSettings trim;  // used by the HollowSvd initializer only
  KMeansConfig kmeans;
};

struct HscEmbedding {
  DenseMatrix factor;   // n_k x r initial orthonormal factor
  DenseMatrix initial;  // rows of U Lambda from the initializer
  DenseMatrix refined;  // rows of U_1 Sigma_1 after one projection step
};

/// One projection step: Y x_l U^T on every mode l != k, then the leading
/// r-dimensional left singular subspace of the mode-k unfolding.
HscEmbedding hscEmbedding(const DenseTensor& y, const HscConfig& cfg);
ClusterAssignment hscCluster(const DenseTensor& y, const HscConfig& cfg);

struct AggregateSvdConfig {
  std::size_t clusters = 2;
  TrimSettings trim;
  KMeansConfig kmeans;
};

/// Sums out every mode past the second, zeroes rows and columns with large L1
/// norm, and clusters rows of the best rank-r approximation. For d = 2 the
/// data matrix is used directly.
ClusterAssignment aggregateSvdCluster(const DenseTensor& y, const AggregateSvdConfig& cfg);

/// Aggregate matrix after row/column trimming.
DenseMatrix trimmedAggregate(const DenseTensor& y, double threshold);

enum class Pipeline { HollowSvd, VanillaSvd, Hsc, AggregateSvd };

std::string_view pipelineName(Pipeline p);
/// Throws UnknownPipelineError listing the valid names.
Pipeline parsePipeline(std::string_view name);
const std::vector<std::string>& pipelineNames();

class UnknownPipelineError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Common parameters for name-dispatched runs.
struct PipelineParams {
  std::size_t mode = 0;
  std::size_t clusters = 2;
  TrimSettings trim;
  HscInitializer hscInitializer = HscInitializer::VanillaSvd;
  KMeansConfig kmeans;
};

ClusterAssignment runPipeline(Pipeline p, const DenseTensor& y, const PipelineParams& params);

}  // namespace tbm
