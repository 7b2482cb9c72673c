#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace bayesnam {

using Scalar = double;
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Index = Eigen::Index;

inline double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// softplus(v) = ln(1 + e^v), numerically safe for large |v|.
inline double softplus(double v) {
  if (v > 30.0) return v;
  return std::log1p(std::exp(v));
}

// Inverse of softplus: returns v with softplus(v) = s, s > 0.
inline double softplus_inv(double s) {
  if (s > 30.0) return s;
  return std::log(std::expm1(s));
}

}  // namespace bayesnam
