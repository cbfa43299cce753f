// SPDX-License-Identifier: Apache-2.0
#include "psgld/dataset.hpp"

#include <cmath>
#include <utility>

#include "psgld/errors.hpp"

namespace psgld {

Dataset Dataset::sparse(std::string name, std::size_t cols, std::vector<std::size_t> row_ptr,
                        std::vector<std::uint32_t> col_index, std::vector<double> values,
                        std::vector<int> labels) {
  if (labels.empty()) throw DatasetError(name + ": no rows");
  if (row_ptr.size() != labels.size() + 1 || row_ptr.front() != 0 ||
      row_ptr.back() != col_index.size() || col_index.size() != values.size())
    throw DatasetError(name + ": inconsistent CSR arrays");
  for (std::uint32_t c : col_index)
    if (c >= cols) throw DatasetError(name + ": feature index " + std::to_string(c) +
                                      " outside dimension " + std::to_string(cols));
  Dataset d;
  d.name_ = std::move(name);
  d.cols_ = cols;
  d.dense_ = false;
  d.row_ptr_ = std::move(row_ptr);
  d.col_index_ = std::move(col_index);
  d.values_ = std::move(values);
  d.labels_ = std::move(labels);
  return d;
}

Dataset Dataset::dense(std::string name, std::size_t cols, std::vector<double> values,
                       std::vector<int> labels) {
  if (labels.empty()) throw DatasetError(name + ": no rows");
  if (values.size() != labels.size() * cols)
    throw DatasetError(name + ": dense value count does not match rows x cols");
  Dataset d;
  d.name_ = std::move(name);
  d.cols_ = cols;
  d.dense_ = true;
  d.values_ = std::move(values);
  d.labels_ = std::move(labels);
  return d;
}

double Dataset::dot(std::size_t row, std::span<const double> w) const {
  double s = 0.0;
  if (dense_) {
    const double* x = values_.data() + row * cols_;
    for (std::size_t j = 0; j < cols_; ++j) s += x[j] * w[j];
  } else {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      s += values_[k] * w[col_index_[k]];
  }
  return s;
}

void Dataset::axpy(std::size_t row, double a, std::span<double> out) const {
  if (dense_) {
    const double* x = values_.data() + row * cols_;
    for (std::size_t j = 0; j < cols_; ++j) out[j] += a * x[j];
  } else {
    for (std::size_t k = row_ptr_[row]; k < row_ptr_[row + 1]; ++k)
      out[col_index_[k]] += a * values_[k];
  }
}

Dataset Dataset::to_dense() const {
  if (dense_) return *this;
  std::vector<double> v(rows() * cols_, 0.0);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      v[i * cols_ + col_index_[k]] = values_[k];
  return dense(name_, cols_, std::move(v), labels_);
}

Dataset Dataset::standardized() const {
  Dataset d = to_dense();
  const std::size_t n = d.rows();
  for (std::size_t j = 0; j < cols_; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += d.values_[i * cols_ + j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = d.values_[i * cols_ + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(n);
    const double scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (std::size_t i = 0; i < n; ++i)
      d.values_[i * cols_ + j] = (d.values_[i * cols_ + j] - mean) * scale;
  }
  return d;
}

Dataset Dataset::subset(std::span<const std::size_t> rows_wanted, std::string name) const {
  std::vector<int> labels;
  labels.reserve(rows_wanted.size());
  if (dense_) {
    std::vector<double> v;
    v.reserve(rows_wanted.size() * cols_);
    for (std::size_t r : rows_wanted) {
      if (r >= rows()) throw DatasetError("row index out of range");
      auto x = dense_row(r);
      v.insert(v.end(), x.begin(), x.end());
      labels.push_back(labels_[r]);
    }
    return dense(std::move(name), cols_, std::move(v), std::move(labels));
  }
  std::vector<std::size_t> ptr{0};
  std::vector<std::uint32_t> idx;
  std::vector<double> val;
  for (std::size_t r : rows_wanted) {
    if (r >= rows()) throw DatasetError("row index out of range");
    auto row = sparse_row(r);
    idx.insert(idx.end(), row.index.begin(), row.index.end());
    val.insert(val.end(), row.value.begin(), row.value.end());
    ptr.push_back(idx.size());
    labels.push_back(labels_[r]);
  }
  return sparse(std::move(name), cols_, std::move(ptr), std::move(idx), std::move(val),
                std::move(labels));
}

Dataset Dataset::with_cols(std::size_t cols) const {
  if (cols < cols_)
    throw DatasetError(name_ + ": cannot shrink dimension from " + std::to_string(cols_) +
                       " to " + std::to_string(cols));
  if (cols == cols_) return *this;
  if (!dense_) {
    Dataset d = *this;
    d.cols_ = cols;
    return d;
  }
  std::vector<double> v(rows() * cols, 0.0);
  for (std::size_t i = 0; i < rows(); ++i)
    for (std::size_t j = 0; j < cols_; ++j) v[i * cols + j] = values_[i * cols_ + j];
  return dense(name_, cols, std::move(v), labels_);
}

}  // namespace psgld
