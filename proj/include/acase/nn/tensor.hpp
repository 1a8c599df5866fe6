#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "acase/errors.hpp"
#include "acase/random.hpp"

namespace acase::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using Index = Eigen::Index;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
};

inline void require_shape(const Matrix& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols)
    throw ShapeMismatch(std::string(what) + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                        ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Glorot/Xavier uniform.
inline Matrix glorot(Index rows, Index cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(-limit, limit);
  return m;
}

inline Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

inline double leaky_relu(double x, double slope = 0.2) { return x > 0.0 ? x : slope * x; }

inline constexpr double kLogitClamp = 30.0;
inline constexpr double kProbClamp = 1e-12;

inline double sigmoid(double z) {
  const double c = std::clamp(z, -kLogitClamp, kLogitClamp);
  return 1.0 / (1.0 + std::exp(-c));
}

// Shift by the max, then clamp each shifted logit at -30, so every
// probability stays strictly positive and the result is shift-invariant.
inline RowVector softmax(const RowVector& logits) {
  const double mx = logits.maxCoeff();
  RowVector e = (logits.array() - mx).max(-kLogitClamp).exp().matrix();
  return e / e.sum();
}

}  // namespace acase::nn
