#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tbm/model.hpp"
#include "tbm/tensor.hpp"

namespace tbm {

/// Hard clustering of n points into r groups. Labels are zero-based.
struct ClusterAssignment {
  Labels labels;
  DenseMatrix centroids;  // r x p
  double cost = 0.0;      // sum of squared distances to assigned centroids
};

struct KMeansOptions {
  std::size_t restarts = 10;
  std::size_t maxIterations = 300;
  double relativeTolerance = 1e-10;
};

/// Sum of ||x_j - centroid(label_j)||^2.
double clusteringCost(const DenseMatrix& points, std::span<const std::size_t> labels,
                      const DenseMatrix& centroids);

/// D^2-weighted seeding. Returns r x p initial centroids.
DenseMatrix kmeansPlusPlusSeeds(const DenseMatrix& points, std::size_t r, std::uint64_t seed);

struct LloydResult {
  ClusterAssignment assignment;
  std::vector<double> costHistory;  // cost after each completed iteration
  std::size_t iterations = 0;
};

/// Lloyd iterations from the given centroids until the labels stop changing,
/// the relative cost decrease drops below tolerance, or the iteration cap.
/// An emptied cluster is re-seeded at the point farthest from its centroid.
LloydResult lloyd(const DenseMatrix& points, DenseMatrix centroids, const KMeansOptions& options = {});

/// Best of `restarts` runs of k-means++ seeding plus Lloyd refinement. Restart
/// i uses deriveSeed(seed, {i}); equal costs go to the lowest restart index.
ClusterAssignment kmeansPlusPlus(const DenseMatrix& points, std::size_t r, std::uint64_t seed,
                                 const KMeansOptions& options = {});

enum class MatchingMethod { Auto, Exhaustive, Assignment };

/// Permutation-minimized misclassification rate between two label vectors
/// over r labels. `Auto` enumerates all permutations for r <= 8 and solves
/// the assignment problem on the confusion matrix otherwise.
double misclassification(std::span<const std::size_t> truth, std::span<const std::size_t> estimate,
                         std::size_t r, MatchingMethod method = MatchingMethod::Auto);

/// Maximum-weight perfect matching on a square weight matrix (Hungarian
/// method). Returns column assigned to each row.
std::vector<std::size_t> maxWeightAssignment(const std::vector<std::vector<double>>& weights);

}  // namespace tbm
