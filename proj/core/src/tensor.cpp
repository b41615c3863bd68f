#include "tbm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace tbm {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix data length " + std::to_string(data_.size()) +
                         " does not match " + std::to_string(rows_) + "x" +
                         std::to_string(cols_));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matrix product: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

namespace {

DenseMatrix elementwise(const DenseMatrix& a, const DenseMatrix& b,
                        const std::function<double(double, double)>& op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix shapes differ");
  }
  DenseMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = op(a.data()[i], b.data()[i]);
  return c;
}

}  // namespace

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  return elementwise(a, b, std::minus<>());
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  return elementwise(a, b, std::plus<>());
}

double frobeniusNorm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

std::size_t productOf(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

std::string formatDims(std::span<const std::size_t> dims) {
  std::ostringstream os;
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "x" : "") << dims[i];
  return os.str();
}

namespace {

void checkDims(const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw std::invalid_argument("tensor order must be at least 1");
  for (std::size_t e : dims) {
    if (e == 0) throw std::invalid_argument("tensor extents must be positive, got " + formatDims(dims));
  }
}

void checkMode(const DenseTensor& t, std::size_t mode) {
  if (mode >= t.order()) {
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range for order-" +
                            std::to_string(t.order()) + " tensor");
  }
}

}  // namespace

DenseTensor::DenseTensor(std::vector<std::size_t> dims, double fill) : dims_(std::move(dims)) {
  checkDims(dims_);
  data_.assign(productOf(dims_), fill);
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  checkDims(dims_);
  if (data_.size() != productOf(dims_)) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match extents " + formatDims(dims_));
  }
}

std::size_t DenseTensor::flatIndex(std::span<const std::size_t> index) const {
  if (index.size() != dims_.size()) throw DimensionError("index arity does not match tensor order");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < dims_.size(); ++k) {
    if (index[k] >= dims_[k]) throw std::out_of_range("tensor index out of range");
    flat = flat * dims_[k] + index[k];
  }
  return flat;
}

std::vector<std::size_t> DenseTensor::multiIndex(std::size_t flat) const {
  std::vector<std::size_t> index(dims_.size());
  for (std::size_t k = dims_.size(); k-- > 0;) {
    index[k] = flat % dims_[k];
    flat /= dims_[k];
  }
  return index;
}

std::size_t DenseTensor::outerSize(std::size_t mode) const {
  return productOf(std::span(dims_).first(mode));
}

std::size_t DenseTensor::innerSize(std::size_t mode) const {
  return productOf(std::span(dims_).subspan(mode + 1));
}

// With last-index-fastest storage, a tensor is a (outer, n_k, inner) block and
// mat_k places (outer, inner) pairs on the column axis as outer * inner + in.
DenseMatrix matricize(const DenseTensor& t, std::size_t mode) {
  checkMode(t, mode);
  const std::size_t outer = t.outerSize(mode);
  const std::size_t nk = t.extent(mode);
  const std::size_t inner = t.innerSize(mode);
  DenseMatrix m(nk, outer * inner);
  const auto src = t.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < nk; ++i) {
      const double* from = src.data() + (o * nk + i) * inner;
      std::copy(from, from + inner, m.row(i).data() + o * inner);
    }
  }
  return m;
}

DenseTensor foldMatrix(const DenseMatrix& m, std::vector<std::size_t> dims, std::size_t mode) {
  DenseTensor t(std::move(dims));
  checkMode(t, mode);
  const std::size_t outer = t.outerSize(mode);
  const std::size_t nk = t.extent(mode);
  const std::size_t inner = t.innerSize(mode);
  if (m.rows() != nk || m.cols() != outer * inner) {
    throw DimensionError("matrix shape does not match tensor extents " + formatDims(t.dims()));
  }
  auto dst = t.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < nk; ++i) {
      const double* from = m.row(i).data() + o * inner;
      std::copy(from, from + inner, dst.data() + (o * nk + i) * inner);
    }
  }
  return t;
}

DenseTensor modeProduct(const DenseTensor& t, const DenseMatrix& m, std::size_t mode) {
  checkMode(t, mode);
  const std::size_t nk = t.extent(mode);
  if (m.cols() != nk) {
    throw DimensionError("mode-" + std::to_string(mode) + " product: matrix has " +
                         std::to_string(m.cols()) + " columns, tensor extent is " +
                         std::to_string(nk));
  }
  if (m.rows() == 0) throw DimensionError("mode product with an empty matrix");
  const std::size_t outer = t.outerSize(mode);
  const std::size_t inner = t.innerSize(mode);
  const std::size_t out_rows = m.rows();

  std::vector<std::size_t> out_dims = t.dims();
  out_dims[mode] = out_rows;
  DenseTensor out(out_dims);
  const auto src = t.data();
  auto dst = out.data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t j = 0; j < out_rows; ++j) {
      double* target = dst.data() + (o * out_rows + j) * inner;
      for (std::size_t i = 0; i < nk; ++i) {
        const double w = m(j, i);
        if (w == 0.0) continue;
        const double* from = src.data() + (o * nk + i) * inner;
        for (std::size_t in = 0; in < inner; ++in) target[in] += w * from[in];
      }
    }
  }
  return out;
}

DenseTensor tuckerAssemble(const DenseTensor& core, std::span<const DenseMatrix> factors) {
  if (factors.size() != core.order()) {
    throw DimensionError("tucker assembly needs one factor per mode (" +
                         std::to_string(core.order()) + "), got " +
                         std::to_string(factors.size()));
  }
  DenseTensor result = core;
  for (std::size_t k = 0; k < factors.size(); ++k) result = modeProduct(result, factors[k], k);
  return result;
}

DenseTensor aggregateModes(const DenseTensor& t, std::size_t keep) {
  if (keep < 1 || keep >= t.order()) {
    throw std::out_of_range("aggregation must keep between 1 and d-1 modes (d=" +
                            std::to_string(t.order()) + "), got " + std::to_string(keep));
  }
  std::vector<std::size_t> kept(t.dims().begin(), t.dims().begin() + static_cast<long>(keep));
  DenseTensor out(kept);
  const std::size_t trailing = t.size() / out.size();
  const auto src = t.data();
  auto dst = out.data();
  for (std::size_t a = 0; a < out.size(); ++a) {
    const double* from = src.data() + a * trailing;
    double s = 0.0;
    for (std::size_t b = 0; b < trailing; ++b) s += from[b];
    dst[a] = s;
  }
  return out;
}

DenseTensor elementwiseProduct(const DenseTensor& a, const DenseTensor& b) {
  if (a.dims() != b.dims()) {
    throw DimensionError("elementwise product of " + formatDims(a.dims()) + " and " +
                         formatDims(b.dims()));
  }
  DenseTensor c(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
  return c;
}

double frobeniusNorm(const DenseTensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v * v;
  return std::sqrt(s);
}

double maxAbs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace tbm
