#include "tbm/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tbm/rng.hpp"

namespace tbm {

namespace {

double squaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t nearestCentroid(std::span<const double> x, const DenseMatrix& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squaredDistance(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

void checkPoints(const DenseMatrix& points, std::size_t r) {
  if (r == 0) throw std::invalid_argument("k-means needs at least one cluster");
  if (r > points.rows()) {
    throw std::invalid_argument("k-means: r=" + std::to_string(r) + " exceeds the number of points " +
                                std::to_string(points.rows()));
  }
  for (double v : points.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("k-means: non-finite coordinate");
  }
}

// Means of the labelled points; an empty cluster takes the point farthest from
// its current centroid, drawn from a cluster that can spare one.
DenseMatrix updateCentroids(const DenseMatrix& points, Labels& labels, std::size_t r) {
  const std::size_t p = points.cols();
  for (std::size_t repair = 0; repair <= r; ++repair) {
    DenseMatrix centroids(r, p);
    std::vector<std::size_t> counts(r, 0);
    for (std::size_t j = 0; j < points.rows(); ++j) {
      ++counts[labels[j]];
      auto c = centroids.row(labels[j]);
      const auto x = points.row(j);
      for (std::size_t t = 0; t < p; ++t) c[t] += x[t];
    }
    std::size_t empty = r;
    for (std::size_t c = 0; c < r; ++c) {
      if (counts[c] == 0) {
        if (empty == r) empty = c;
        continue;
      }
      const double inv = 1.0 / static_cast<double>(counts[c]);
      for (double& v : centroids.row(c)) v *= inv;
    }
    if (empty == r) return centroids;

    std::size_t far = points.rows();
    double far_d = -1.0;
    for (std::size_t j = 0; j < points.rows(); ++j) {
      if (counts[labels[j]] < 2) continue;
      const double d = squaredDistance(points.row(j), centroids.row(labels[j]));
      if (d > far_d) {
        far_d = d;
        far = j;
      }
    }
    labels[far] = empty;
  }
  throw std::logic_error("k-means: empty-cluster repair did not terminate");
}

}  // namespace

double clusteringCost(const DenseMatrix& points, std::span<const std::size_t> labels,
                      const DenseMatrix& centroids) {
  if (labels.size() != points.rows()) throw DimensionError("label count does not match point count");
  double cost = 0.0;
  for (std::size_t j = 0; j < points.rows(); ++j) {
    if (labels[j] >= centroids.rows()) throw std::invalid_argument("label out of range");
    cost += squaredDistance(points.row(j), centroids.row(labels[j]));
  }
  return cost;
}

DenseMatrix kmeansPlusPlusSeeds(const DenseMatrix& points, std::size_t r, std::uint64_t seed) {
  checkPoints(points, r);
  const std::size_t n = points.rows();
  SplitMix64 rng(seed);
  DenseMatrix seeds(r, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());

  std::size_t chosen = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0;; ++c) {
    std::copy(points.row(chosen).begin(), points.row(chosen).end(), seeds.row(c).begin());
    if (c + 1 == r) break;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      d2[j] = std::min(d2[j], squaredDistance(points.row(j), seeds.row(c)));
      total += d2[j];
    }
    if (total <= 0.0) {
      chosen = static_cast<std::size_t>(rng.below(n));
      continue;
    }
    const double target = rng.uniform() * total;
    double acc = 0.0;
    chosen = n - 1;
    for (std::size_t j = 0; j < n; ++j) {
      acc += d2[j];
      if (acc > target && d2[j] > 0.0) {
        chosen = j;
        break;
      }
    }
    while (d2[chosen] <= 0.0 && chosen > 0) --chosen;
  }
  return seeds;
}

LloydResult lloyd(const DenseMatrix& points, DenseMatrix centroids, const KMeansOptions& options) {
  const std::size_t r = centroids.rows();
  checkPoints(points, r);
  if (centroids.cols() != points.cols()) throw DimensionError("centroid dimension does not match points");
  const std::size_t n = points.rows();

  LloydResult result;
  Labels labels(n);
  for (std::size_t j = 0; j < n; ++j) labels[j] = nearestCentroid(points.row(j), centroids);

  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < options.maxIterations; ++it) {
    centroids = updateCentroids(points, labels, r);
    const double cost = clusteringCost(points, labels, centroids);
    result.costHistory.push_back(cost);
    result.iterations = it + 1;
    if (cost <= 0.0) break;
    if (std::isfinite(previous) && previous - cost < options.relativeTolerance * previous) break;
    previous = cost;

    bool changed = false;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t best = nearestCentroid(points.row(j), centroids);
      if (best != labels[j]) {
        labels[j] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }

  // Centroids are the means of the final labels.
  centroids = updateCentroids(points, labels, r);
  result.assignment.cost = clusteringCost(points, labels, centroids);
  result.assignment.labels = std::move(labels);
  result.assignment.centroids = std::move(centroids);
  if (result.costHistory.empty() || result.assignment.cost != result.costHistory.back()) {
    result.costHistory.push_back(result.assignment.cost);
  }
  return result;
}

ClusterAssignment kmeansPlusPlus(const DenseMatrix& points, std::size_t r, std::uint64_t seed,
                                 const KMeansOptions& options) {
  checkPoints(points, r);
  const std::size_t restarts = std::max<std::size_t>(1, options.restarts);
  ClusterAssignment best;
  best.cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < restarts; ++i) {
    const std::uint64_t restart_seed = deriveSeed(seed, {i});
    auto run = lloyd(points, kmeansPlusPlusSeeds(points, r, restart_seed), options);
    if (run.assignment.cost < best.cost) best = std::move(run.assignment);
  }
  return best;
}

std::vector<std::size_t> maxWeightAssignment(const std::vector<std::vector<double>>& weights) {
  const std::size_t n = weights.size();
  for (const auto& row : weights) {
    if (row.size() != n) throw DimensionError("assignment needs a square weight matrix");
  }
  if (n == 0) return {};
  // Shortest augmenting path Hungarian method on cost = -weight, 1-based potentials.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

double misclassification(std::span<const std::size_t> truth, std::span<const std::size_t> estimate,
                         std::size_t r, MatchingMethod method) {
  if (truth.size() != estimate.size()) {
    throw DimensionError("misclassification: label vectors have lengths " + std::to_string(truth.size()) +
                         " and " + std::to_string(estimate.size()));
  }
  if (r == 0) throw std::invalid_argument("misclassification needs r >= 1");
  const std::size_t n = truth.size();
  if (n == 0) return 0.0;

  // confusion[a][b] = #{i : estimate(i) = a, truth(i) = b}
  std::vector<std::vector<double>> confusion(r, std::vector<double>(r, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (truth[i] >= r || estimate[i] >= r) {
      throw std::invalid_argument("misclassification: label outside [0, " + std::to_string(r) + ")");
    }
    confusion[estimate[i]][truth[i]] += 1.0;
  }

  if (method == MatchingMethod::Auto) method = r <= 8 ? MatchingMethod::Exhaustive : MatchingMethod::Assignment;

  double agreements = 0.0;
  if (method == MatchingMethod::Exhaustive) {
    std::vector<std::size_t> perm(r);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      double s = 0.0;
      for (std::size_t a = 0; a < r; ++a) s += confusion[a][perm[a]];
      agreements = std::max(agreements, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    const auto match = maxWeightAssignment(confusion);
    for (std::size_t a = 0; a < r; ++a) agreements += confusion[a][match[a]];
  }
  return 1.0 - agreements / static_cast<double>(n);
}

}  // namespace tbm
