#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "rss/pauli.hpp"

namespace rss::test {

inline double max_abs(const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Fraction of entries with |a - b| <= z * se (entries with se == 0 must match to 1e-12).
inline double fraction_within(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& se, double z) {
  int ok = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double tol = se[i] > 0 ? z * se[i] : 1e-12;
    if (std::abs(a[i] - b[i]) <= tol) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(a.size());
}

inline Eigen::Matrix2cd hadamard() {
  Eigen::Matrix2cd h;
  h << 1, 1, 1, -1;
  return h / std::sqrt(2.0);
}

}  // namespace rss::test
