#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tbm {

/// Thrown when operand extents do not line up (mode products, elementwise ops).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major dense real matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  DenseMatrix transposed() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);

double frobeniusNorm(const DenseMatrix& m);

/// Dense d-way tensor stored in lexicographic order with the last index
/// varying fastest. Mode indices are zero-based throughout the C++ API.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> dims, double fill = 0.0);
  DenseTensor(std::vector<std::size_t> dims, std::vector<double> data);

  std::size_t order() const noexcept { return dims_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t extent(std::size_t mode) const { return dims_.at(mode); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  std::size_t flatIndex(std::span<const std::size_t> index) const;
  std::vector<std::size_t> multiIndex(std::size_t flat) const;

  double& operator()(std::span<const std::size_t> index) { return data_[flatIndex(index)]; }
  double operator()(std::span<const std::size_t> index) const { return data_[flatIndex(index)]; }
  double& at(std::initializer_list<std::size_t> index) {
    return data_[flatIndex({index.begin(), index.size()})];
  }
  double at(std::initializer_list<std::size_t> index) const {
    return data_[flatIndex({index.begin(), index.size()})];
  }

  /// Product of extents before / after `mode`.
  std::size_t outerSize(std::size_t mode) const;
  std::size_t innerSize(std::size_t mode) const;

  friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> data_;
};

std::size_t productOf(std::span<const std::size_t> dims);

/// Mode-k unfolding. Row i is the mode-k index; the column enumerates the
/// remaining modes in increasing mode order, last remaining mode fastest.
DenseMatrix matricize(const DenseTensor& t, std::size_t mode);

/// Inverse of matricize for a tensor with the given extents.
DenseTensor foldMatrix(const DenseMatrix& m, std::vector<std::size_t> dims, std::size_t mode);

/// t ×_mode m, where m has shape (new extent) × (extent of `mode`).
DenseTensor modeProduct(const DenseTensor& t, const DenseMatrix& m, std::size_t mode);

/// core ×_1 F1 ×_2 ... ×_d Fd.
DenseTensor tuckerAssemble(const DenseTensor& core, std::span<const DenseMatrix> factors);

/// Sums out every mode after the first `keep` modes.
DenseTensor aggregateModes(const DenseTensor& t, std::size_t keep);

DenseTensor elementwiseProduct(const DenseTensor& a, const DenseTensor& b);
double frobeniusNorm(const DenseTensor& t);
double maxAbs(std::span<const double> values);

std::string formatDims(std::span<const std::size_t> dims);

}  // namespace tbm
