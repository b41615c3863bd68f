#include "tbm/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace tbm {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void requireFinite(const DenseMatrix& a, const char* who) {
  for (double v : a.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite matrix entry");
  }
}

}  // namespace

EigenPairs symEigen(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("symEigen needs a square matrix");
  requireFinite(a, "symEigen");
  const std::size_t n = a.rows();
  if (n == 0) return {};

  const double scale = std::max(1.0, maxAbs(a.data()));
  Eigen::MatrixXd sym(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * scale) {
        throw std::invalid_argument("symEigen: matrix is not symmetric");
      }
      sym(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 0.5 * (a(i, j) + a(j, i));
    }
  }

  // Householder tridiagonalization followed by implicit symmetric QR.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw std::runtime_error("symEigen: QR iteration did not converge");

  EigenPairs out;
  out.values.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  out.vectors = DenseMatrix(n, n);
  const auto& v = solver.eigenvectors();
  for (std::size_t c = 0; c < n; ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    const double norm = v.col(col).norm();
    double sign = 1.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double x = v(static_cast<Eigen::Index>(r), col);
      if (std::abs(x) > 1e-12 * norm) {
        sign = x < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, c) = sign * v(static_cast<Eigen::Index>(r), col);
  }
  return out;
}

TruncatedEigen topByAbs(const EigenPairs& pairs, std::size_t r) {
  const std::size_t n = pairs.values.size();
  if (r < 1 || r > n) {
    throw std::out_of_range("topByAbs: r=" + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = pairs.values[a];
    const double vb = pairs.values[b];
    if (std::abs(va) != std::abs(vb)) return std::abs(va) > std::abs(vb);
    if (va != vb) return va > vb;
    return a < b;
  });

  TruncatedEigen top;
  top.values.resize(r);
  top.vectors = DenseMatrix(n, r);
  for (std::size_t c = 0; c < r; ++c) {
    top.values[c] = pairs.values[order[c]];
    for (std::size_t i = 0; i < n; ++i) top.vectors(i, c) = pairs.vectors(i, order[c]);
  }
  return top;
}

DenseMatrix scaledEigenvectors(const TruncatedEigen& top) {
  DenseMatrix e = top.vectors;
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t c = 0; c < e.cols(); ++c) e(i, c) *= top.values[c];
  return e;
}

DenseMatrix bestRankR(const DenseMatrix& a, std::size_t r) {
  const auto top = topByAbs(symEigen(a), r);
  const std::size_t n = a.rows();
  DenseMatrix out(n, n);
  for (std::size_t c = 0; c < r; ++c) {
    const double lambda = top.values[c];
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = lambda * top.vectors(i, c);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vi * top.vectors(j, c);
    }
  }
  return out;
}

double spectralNorm(const DenseMatrix& a, PowerIterationOptions options) {
  requireFinite(a, "spectralNorm");
  const std::size_t m = a.cols();
  if (a.rows() == 0 || m == 0) return 0.0;
  if (maxAbs(a.data()) == 0.0) return 0.0;

  const Eigen::Map<const RowMajor> mat(a.data().data(), static_cast<Eigen::Index>(a.rows()),
                                       static_cast<Eigen::Index>(m));
  Eigen::VectorXd v(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) v(static_cast<Eigen::Index>(i)) = 1.0 + 0.01 * std::sin(1.0 + static_cast<double>(i));
  v.normalize();

  double estimate = 0.0;
  for (std::size_t it = 0; it < options.maxIterations; ++it) {
    Eigen::VectorXd w = mat.transpose() * (mat * v);
    const double rayleigh = v.dot(w);  // ||A v||^2 for unit v
    const double norm = w.norm();
    if (norm == 0.0) {
      // Start vector fell into the null space; restart along a coordinate axis.
      v.setZero();
      v(static_cast<Eigen::Index>(it % m)) = 1.0;
      continue;
    }
    const double next = std::sqrt(std::max(rayleigh, 0.0));
    v = w / norm;
    if (it > 0 && std::abs(next - estimate) <= options.tolerance * next) {
      // Refine with the final iterate; the Rayleigh quotient has stagnated.
      return std::max(next, (mat * v).norm());
    }
    estimate = next;
  }
  throw ConvergenceError("spectralNorm: power iteration did not converge", estimate);
}

namespace {

template <bool WithAbsolute>
void accumulateGram(const DenseMatrix& a, DenseMatrix& g, DenseMatrix* g_abs) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  // Compressed-column view of the nonzeros.
  std::vector<std::size_t> col_start(m + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = a.row(i);
    for (std::size_t j = 0; j < m; ++j)
      if (row[j] != 0.0) ++col_start[j + 1];
  }
  for (std::size_t j = 0; j < m; ++j) col_start[j + 1] += col_start[j];
  std::vector<std::size_t> rows(col_start[m]);
  std::vector<double> vals(col_start[m]);
  {
    std::vector<std::size_t> fill(col_start.begin(), col_start.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = a.row(i);
      for (std::size_t j = 0; j < m; ++j) {
        if (row[j] == 0.0) continue;
        rows[fill[j]] = i;
        vals[fill[j]] = row[j];
        ++fill[j];
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t p = col_start[j]; p < col_start[j + 1]; ++p) {
      const std::size_t ip = rows[p];
      const double vp = vals[p];
      auto grow = g.row(ip);
      for (std::size_t q = p; q < col_start[j + 1]; ++q) {
        grow[rows[q]] += vp * vals[q];
        if constexpr (WithAbsolute) (*g_abs)(ip, rows[q]) += std::abs(vp * vals[q]);
      }
    }
  }
  // Only the upper triangle (row <= col) was accumulated.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i + 1; k < n; ++k) {
      g(k, i) = g(i, k);
      if constexpr (WithAbsolute) (*g_abs)(k, i) = (*g_abs)(i, k);
    }
  }
}

}  // namespace

DenseMatrix gram(const DenseMatrix& a) {
  DenseMatrix g(a.rows(), a.rows());
  accumulateGram<false>(a, g, nullptr);
  return g;
}

GramPair gramWithAbsolute(const DenseMatrix& a) {
  GramPair out{DenseMatrix(a.rows(), a.rows()), DenseMatrix(a.rows(), a.rows())};
  accumulateGram<true>(a, out.plain, &out.absolute);
  return out;
}

}  // namespace tbm
