#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "acase/nn/tensor.hpp"

namespace acase::nn {

// p = sigmoid(h_i^T W h_j)
inline double link_score(const RowVector& h_i, const RowVector& h_j, const Matrix& w) {
  if (w.rows() != h_i.cols() || w.cols() != h_j.cols()) throw ShapeMismatch("bilinear weight does not match embeddings");
  return sigmoid((h_i * w * h_j.transpose())(0, 0));
}

// Column-wise mean over node rows.
inline RowVector mean_readout(const Matrix& h) {
  if (h.rows() == 0) throw EmptyGraph("mean readout of a graph with no nodes");
  return h.colwise().mean();
}

// softmax(h_G W_G + b_G); W_G is (d x classes), b_G is (1 x classes).
inline RowVector classify_graph(const RowVector& h_g, const Matrix& w_g, const Matrix& b_g) {
  if (w_g.rows() != h_g.cols()) throw ShapeMismatch("classifier weight rows != embedding dim");
  require_shape(b_g, 1, w_g.cols(), "classifier bias");
  return softmax(h_g * w_g + b_g);
}

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;  // dL/dpred
};

// Mean binary cross-entropy over probabilities, clamped to [1e-12, 1 - 1e-12].
inline LossGrad bce_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ShapeMismatch("bce: prediction/target length mismatch");
  LossGrad r;
  r.grad.resize(pred.size());
  const double n = static_cast<double>(pred.size());
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double p = std::clamp(pred[k], kProbClamp, 1.0 - kProbClamp);
    const double y = target[k];
    r.loss -= (y * std::log(p) + (1.0 - y) * std::log(1.0 - p)) / n;
    r.grad[k] = (-(y / p) + (1.0 - y) / (1.0 - p)) / n;
  }
  return r;
}

// Mean categorical cross-entropy; pred rows are probability vectors.
inline LossGrad ce_loss(const Matrix& pred, std::span<const int> target) {
  if (static_cast<std::size_t>(pred.rows()) != target.size()) throw ShapeMismatch("ce: row/target mismatch");
  LossGrad r;
  r.grad.assign(static_cast<std::size_t>(pred.size()), 0.0);
  const double n = static_cast<double>(pred.rows());
  for (Index i = 0; i < pred.rows(); ++i) {
    const double p = std::max(pred(i, target[static_cast<std::size_t>(i)]), kProbClamp);
    r.loss -= std::log(p) / n;
    r.grad[static_cast<std::size_t>(i * pred.cols() + target[static_cast<std::size_t>(i)])] = -1.0 / (p * n);
  }
  return r;
}

// Numerically stable BCE on a logit: log(1 + e^z) - y z.
inline double bce_with_logit(double z, double y) {
  const double c = std::clamp(z, -kLogitClamp, kLogitClamp);
  const double softplus = c > 0.0 ? c + std::log1p(std::exp(-c)) : std::log1p(std::exp(c));
  return softplus - y * c;
}

// -log softmax(logits)[y] by log-sum-exp.
inline double ce_with_logits(const RowVector& logits, int y) {
  const Eigen::Array<double, 1, Eigen::Dynamic> shifted = (logits.array() - logits.maxCoeff()).max(-kLogitClamp);
  return std::log(shifted.exp().sum()) - shifted(y);
}

}  // namespace acase::nn
