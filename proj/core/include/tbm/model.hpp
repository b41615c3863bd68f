#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tbm/rng.hpp"
#include "tbm/tensor.hpp"

namespace tbm {

/// Entry distribution of a tensor block model. `Aggregated` marks a spec
/// produced by aggregateSpec: its entries are sums of the original entries and
/// are only known to be sub-Poisson, so such specs cannot be sampled.
enum class NoiseFamily { Bernoulli, Poisson, Aggregated };

std::string_view toString(NoiseFamily family);
NoiseFamily parseNoiseFamily(std::string_view name);

/// Membership labels are zero-based in memory: z_k(i) in [0, r_k).
using Labels = std::vector<std::size_t>;

/// Tensor block model: E[Y_{i1..id}] = rho * S_{z1(i1)..zd(id)}.
struct TbmSpec {
  double rho = 0.0;
  DenseTensor core;
  std::vector<Labels> memberships;
  NoiseFamily noise = NoiseFamily::Bernoulli;

  std::size_t order() const noexcept { return memberships.size(); }
  std::vector<std::size_t> dims() const;
  const std::vector<std::size_t>& ranks() const noexcept { return core.dims(); }

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Balanced contiguous labels: z(i) = floor(i * r / n).
Labels balancedLabels(std::size_t n, std::size_t r);

/// 0/1 membership (indicator) matrix Z with Z(i, z(i)) = 1, shape n x r.
DenseMatrix membershipMatrix(std::span<const std::size_t> labels, std::size_t r);

/// Cluster sizes |z^{-1}{l}| for l in [0, r).
std::vector<std::size_t> clusterSizes(std::span<const std::size_t> labels, std::size_t r);

/// Spec with the same labels on every mode (the symmetric experimental setting).
TbmSpec symmetricSpec(double rho, DenseTensor core, std::size_t n, NoiseFamily noise);

/// Signal tensor X = rho * S x_1 Z1 ... x_d Zd, by direct indexing.
DenseTensor signalTensor(const TbmSpec& spec);

/// Draws Y with independent Bernoulli or Poisson entries. Entry i draws from
/// a stream keyed by (seed, i), so the result depends only on (spec, seed).
DenseTensor sample(const TbmSpec& spec, std::uint64_t seed);

/// Poisson(mean) draw from the given stream: inversion below mean 10, PTRS above.
std::uint64_t samplePoisson(double mean, SplitMix64& rng);

struct ModelDiagnostics {
  std::vector<double> separations;  // delta_k
  std::vector<double> balances;     // alpha_k; 0 when a cluster is empty
  std::vector<std::string> warnings;
};

ModelDiagnostics diagnostics(const TbmSpec& spec);
double modeSeparation(const DenseTensor& core, std::size_t mode);
double modeBalance(std::span<const std::size_t> labels, std::size_t r);

/// Aggregate model after summing out all modes past `keep`: density
/// rho * n_{keep+1}...n_d and core averaged over the trailing memberships.
TbmSpec aggregateSpec(const TbmSpec& spec, std::size_t keep);

/// beta(t, s2) = exp(-s2) * (e*s2 / (s2 + t))^(s2 + t).
double bennettBeta(double t, double sigma2);

struct TailBounds {
  double bennett;
  double bernstein1;
  double bernstein2;
};

/// Right-hand sides of the Bennett and two Bernstein tail inequalities for an
/// upper sub-Poisson variable with variance proxy sigma2.
TailBounds tailBounds(double t, double sigma2);

/// Lower bound on min_{z(i) != z(j)} ||(XX^T)_{i:} - (XX^T)_{j:}|| where X is
/// the mode-k unfolding of the signal tensor.
double separationLowerBound(const TbmSpec& spec, std::size_t mode);

/// 128 Q r ||E||^2 / (n Delta^2): deterministic misclassification bound for
/// quasi-optimal k-means on a best rank-r approximation.
double kmeansMisclassBound(double noiseNorm, std::size_t r, std::size_t n, double delta, double q);

/// Cluster-size hypothesis of the bound above: min cluster size > 128 Q r ||E||^2 / Delta^2.
bool kmeansBoundApplies(double noiseNorm, std::size_t r, std::size_t minClusterSize, double delta,
                        double q);

namespace cores {

/// 2x2x2 core with constant-row aggregate (entry 1 iff the labels have even parity).
DenseTensor uninformative();
/// 2x2x2 core with diagonal aggregate (entry 1 iff all labels agree).
DenseTensor informative();
/// 2x2x2 core of the embedding study: uninformative() with zeros raised to 1/2.
DenseTensor embeddingStudy();

}  // namespace cores

}  // namespace tbm
