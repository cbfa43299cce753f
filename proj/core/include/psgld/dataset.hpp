// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace psgld {

/// Labeled design matrix, stored either as CSR (LIBSVM sources) or dense
/// row-major (images, standardized features). Immutable once built.
class Dataset {
 public:
  struct SparseRow {
    std::span<const std::uint32_t> index;
    std::span<const double> value;
  };

  static Dataset sparse(std::string name, std::size_t cols, std::vector<std::size_t> row_ptr,
                        std::vector<std::uint32_t> col_index, std::vector<double> values,
                        std::vector<int> labels);
  static Dataset dense(std::string name, std::size_t cols, std::vector<double> values,
                       std::vector<int> labels);

  const std::string& name() const { return name_; }
  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return cols_; }
  bool is_dense() const { return dense_; }
  std::span<const int> labels() const { return labels_; }
  int label(std::size_t row) const { return labels_[row]; }

  std::span<const double> dense_row(std::size_t row) const {
    return {values_.data() + row * cols_, cols_};
  }
  SparseRow sparse_row(std::size_t row) const {
    const std::size_t b = row_ptr_[row], e = row_ptr_[row + 1];
    return {{col_index_.data() + b, e - b}, {values_.data() + b, e - b}};
  }

  template <class F>
  void for_each_nonzero(std::size_t row, F&& f) const {
    if (dense_) {
      const double* x = values_.data() + row * cols_;
      for (std::size_t j = 0; j < cols_; ++j) f(j, x[j]);
    } else {
      for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
        f(static_cast<std::size_t>(col_index_[k]), values_[k]);
    }
  }

  double dot(std::size_t row, std::span<const double> w) const;
  /// out += a * x_row
  void axpy(std::size_t row, double a, std::span<double> out) const;

  Dataset to_dense() const;
  /// Zero-mean / unit-variance columns (constant columns are only centered).
  Dataset standardized() const;
  Dataset subset(std::span<const std::size_t> rows, std::string name) const;
  /// Same rows, column count widened to cols (must be >= current).
  Dataset with_cols(std::size_t cols) const;

 private:
  std::string name_;
  std::size_t cols_ = 0;
  bool dense_ = false;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_index_;
  std::vector<double> values_;
  std::vector<int> labels_;
};

}  // namespace psgld
