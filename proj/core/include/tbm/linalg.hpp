#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "tbm/tensor.hpp"

namespace tbm {

/// Full symmetric eigendecomposition. Column i of `vectors` pairs with
/// values[i]; values are in ascending order. Each eigenvector is normalized
/// so that its first nonzero component is positive.
struct EigenPairs {
  std::vector<double> values;
  DenseMatrix vectors;
};

/// The r leading eigenpairs by |lambda|.
struct TruncatedEigen {
  std::vector<double> values;
  DenseMatrix vectors;  // n x r
};

/// Raised by spectralNorm when power iteration fails to settle.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double bestEstimate)
      : std::runtime_error(what), best_estimate_(bestEstimate) {}
  double bestEstimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

/// Decomposes (A + A^T) / 2 after checking A is square, finite and symmetric
/// to 1e-12 relative to its largest entry.
EigenPairs symEigen(const DenseMatrix& a);

/// Selects r pairs sorted by |lambda| descending; equal magnitudes go to the
/// larger signed value first, then to the lower original index.
TruncatedEigen topByAbs(const EigenPairs& pairs, std::size_t r);

/// V_r diag(lambda_r) V_r^T from the top-r pairs by |lambda|.
DenseMatrix bestRankR(const DenseMatrix& a, std::size_t r);

/// Rows of V_r diag(lambda_r): the value-weighted spectral embedding.
DenseMatrix scaledEigenvectors(const TruncatedEigen& top);

struct PowerIterationOptions {
  double tolerance = 1e-10;
  std::size_t maxIterations = 10000;
};

/// Largest singular value via power iteration on A^T A from a fixed start.
double spectralNorm(const DenseMatrix& a, PowerIterationOptions options = {});

/// Gram matrix A A^T. Columns are scanned for nonzeros, so sparse inputs cost
/// O(sum over columns of nnz^2); the result is exactly symmetric.
DenseMatrix gram(const DenseMatrix& a);

/// Gram matrices of A and of |A| from one sparse pass.
struct GramPair {
  DenseMatrix plain;
  DenseMatrix absolute;
};
GramPair gramWithAbsolute(const DenseMatrix& a);

}  // namespace tbm
