// SPDX-License-Identifier: Apache-2.0
#include <Eigen/Dense>
#include <cmath>

#include "psgld/errors.hpp"
#include "psgld/models.hpp"

namespace psgld {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMat>;
using Weights = Eigen::Map<RowMat>;
using ConstBias = Eigen::Map<const Eigen::RowVectorXd>;
using Bias = Eigen::Map<Eigen::RowVectorXd>;

RowMat gather_rows(const Dataset& data, std::span<const std::size_t> rows) {
  RowMat x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.cols()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = data.dense_row(rows[i]);
    for (std::size_t j = 0; j < src.size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = src[j];
  }
  return x;
}

// In-place row-wise softmax with max subtraction.
void softmax_rows(RowMat& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    auto row = z.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

struct ForwardPass {
  std::vector<RowMat> pre;   // pre-activations per layer
  std::vector<RowMat> post;  // post[0] = input, post[l+1] = relu(pre[l]) for hidden layers
};

ForwardPass run_forward(std::span<const LayerLayout> layout, std::span<const double> theta,
                        RowMat input) {
  ForwardPass f;
  f.post.push_back(std::move(input));
  for (std::size_t l = 0; l < layout.size(); ++l) {
    const LayerLayout& L = layout[l];
    ConstWeights w(theta.data() + L.weight_offset, static_cast<Eigen::Index>(L.out),
                   static_cast<Eigen::Index>(L.in));
    ConstBias b(theta.data() + L.bias_offset, static_cast<Eigen::Index>(L.out));
    RowMat z = f.post.back() * w.transpose();
    z.rowwise() += b;
    f.pre.push_back(z);
    if (l + 1 < layout.size()) f.post.push_back(z.cwiseMax(0.0));
  }
  return f;
}

}  // namespace

MlpModel::MlpModel(std::vector<std::size_t> layer_sizes, PriorConfig prior,
                   std::shared_ptr<const Dataset> data)
    : sizes_(std::move(layer_sizes)), prior_(prior), data_(std::move(data)) {
  if (sizes_.size() < 2) throw ConfigError("mlp needs at least input and output layer sizes");
  for (std::size_t s : sizes_)
    if (s == 0) throw ConfigError("mlp layer sizes must be positive");
  prior_.validate();
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    LayerLayout L;
    L.in = sizes_[l];
    L.out = sizes_[l + 1];
    L.weight_offset = offset;
    offset += L.in * L.out;
    L.bias_offset = offset;
    offset += L.out;
    layout_.push_back(L);
  }
  dim_ = offset;
  if (data_) {
    if (!data_->is_dense()) data_ = std::make_shared<const Dataset>(data_->to_dense());
    if (data_->cols() != sizes_.front())
      throw DatasetError("mlp input size " + std::to_string(sizes_.front()) +
                         " does not match dataset dimension " + std::to_string(data_->cols()));
    for (int y : data_->labels())
      if (y < 0 || static_cast<std::size_t>(y) >= sizes_.back())
        throw DatasetError(data_->name() + ": label outside [0, classes)");
  }
}

const Dataset& MlpModel::bound_data() const {
  if (!data_) throw DatasetError("mlp model has no bound dataset");
  return *data_;
}

std::size_t MlpModel::data_size() const { return data_ ? data_->rows() : 0; }

double MlpModel::log_prior(std::span<const double> theta) const {
  return log_prior_density(theta, prior_);
}

void MlpModel::prior_grad(std::span<const double> theta, std::span<double> out) const {
  const double inv = 1.0 / prior_.sigma_sq;
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = -theta[i] * inv;
}

double MlpModel::mean_log_likelihood(std::span<const double> theta,
                                     const Minibatch& batch) const {
  check_dim(theta);
  const Dataset& data = bound_data();
  ForwardPass f = run_forward(layout_, theta, gather_rows(data, batch.indices()));
  RowMat& z = f.pre.back();
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    s += z(i, data.label(batch.indices()[static_cast<std::size_t>(i)])) - lse;
  }
  return s / static_cast<double>(batch.size());
}

void MlpModel::mean_grad(std::span<const double> theta, const Minibatch& batch,
                         std::span<double> out) const {
  const Dataset& data = bound_data();
  ForwardPass f = run_forward(layout_, theta, gather_rows(data, batch.indices()));
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  // d log softmax_y / d logits = onehot(y) - p
  RowMat delta = f.pre.back();
  softmax_rows(delta);
  delta = -delta;
  for (std::size_t i = 0; i < batch.size(); ++i)
    delta(static_cast<Eigen::Index>(i), data.label(batch.indices()[i])) += 1.0;

  for (std::size_t l = layout_.size(); l-- > 0;) {
    const LayerLayout& L = layout_[l];
    Weights gw(out.data() + L.weight_offset, static_cast<Eigen::Index>(L.out),
               static_cast<Eigen::Index>(L.in));
    Bias gb(out.data() + L.bias_offset, static_cast<Eigen::Index>(L.out));
    gw.noalias() = inv_n * (delta.transpose() * f.post[l]);
    gb = inv_n * delta.colwise().sum();
    if (l == 0) break;
    ConstWeights w(theta.data() + L.weight_offset, static_cast<Eigen::Index>(L.out),
                   static_cast<Eigen::Index>(L.in));
    RowMat back = delta * w;
    // ReLU subgradient is 0 at exactly 0.
    delta = back.cwiseProduct((f.pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
}

ParamVector MlpModel::initial_theta(Rng& rng) const {
  ParamVector t(dim_);
  for (const LayerLayout& L : layout_) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(L.in));
    for (std::size_t i = L.weight_offset; i < L.bias_offset + L.out; ++i) t[i] = sd * rng.normal();
  }
  return t;
}

std::vector<double> MlpModel::predict_proba(std::span<const double> theta,
                                            const Dataset& data) const {
  check_dim(theta);
  if (data.cols() != sizes_.front()) throw DatasetError("mlp: input dimension mismatch");
  const Dataset& dense = data;
  const std::size_t k = num_classes();
  std::vector<double> p(data.rows() * k);
  constexpr std::size_t kChunk = 512;
  std::vector<std::size_t> rows;
  for (std::size_t b = 0; b < data.rows(); b += kChunk) {
    const std::size_t e = std::min(data.rows(), b + kChunk);
    rows.clear();
    for (std::size_t r = b; r < e; ++r) rows.push_back(r);
    RowMat x;
    if (dense.is_dense()) {
      x = gather_rows(dense, rows);
    } else {
      x = RowMat::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.cols()));
      for (std::size_t i = 0; i < rows.size(); ++i)
        data.for_each_nonzero(rows[i], [&](std::size_t j, double v) {
          x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        });
    }
    ForwardPass f = run_forward(layout_, theta, std::move(x));
    softmax_rows(f.pre.back());
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t c = 0; c < k; ++c)
        p[(b + i) * k + c] = f.pre.back()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
  }
  return p;
}

std::vector<double> MlpModel::logits(std::span<const double> theta,
                                     std::span<const double> x) const {
  check_dim(theta);
  if (x.size() != sizes_.front()) throw DatasetError("mlp: input dimension mismatch");
  RowMat in(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) in(0, static_cast<Eigen::Index>(j)) = x[j];
  ForwardPass f = run_forward(layout_, theta, std::move(in));
  const RowMat& z = f.pre.back();
  return std::vector<double>(z.data(), z.data() + z.size());
}

std::vector<double> MlpModel::forward(std::span<const double> theta,
                                      std::span<const double> x) const {
  std::vector<double> z = logits(theta, x);
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) v /= s;
  return z;
}

}  // namespace psgld
