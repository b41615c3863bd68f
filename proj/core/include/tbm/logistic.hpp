#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tbm/tensor.hpp"

namespace tbm {

struct LogisticOptions {
  double l2Penalty = 1e-6;        // applied to every weight except the intercept
  double gradientTolerance = 1e-8;
  std::size_t maxIterations = 500;
};

struct LogisticFit {
  std::vector<double> weights;  // weights[0] is the intercept
  std::size_t iterations = 0;
  double gradientNorm = 0.0;
  double penalizedLoss = 0.0;
  /// Wald chi-square statistic for the non-intercept weights (w^T Cov^-1 w
  /// with Cov the inverse penalized Hessian).
  double waldStatistic = 0.0;
  bool converged = false;
};

/// Raised when all labels agree; the boundary is not identifiable.
class DegenerateLabelsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when Newton iterations exhaust the budget; carries the last iterate.
class FitConvergenceError : public std::runtime_error {
 public:
  FitConvergenceError(const std::string& what, LogisticFit last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const LogisticFit& lastIterate() const noexcept { return last_; }

 private:
  LogisticFit last_;
};

/// L2-penalized logistic regression by damped Newton iterations. `features`
/// is n x p and must include a leading column of ones for the intercept.
LogisticFit fitLogistic(const DenseMatrix& features, std::span<const int> labels,
                        const LogisticOptions& options = {});

double logisticProbability(std::span<const double> weights, std::span<const double> x);

}  // namespace tbm
