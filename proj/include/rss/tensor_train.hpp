#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace rss {

/// Real order-3 core of shape (left, 2, right), stored row-major as [a][i][b].
struct TtCore {
  int left = 1;
  int right = 1;
  std::vector<double> data;

  TtCore() : data(2, 0.0) {}
  TtCore(int l, int r) : left(l), right(r), data(static_cast<std::size_t>(l) * 2 * static_cast<std::size_t>(r), 0.0) {}

  double& operator()(int a, int i, int b) { return data[index(a, i, b)]; }
  double operator()(int a, int i, int b) const { return data[index(a, i, b)]; }

  /// (left * 2) x right view with row a*2+i.
  Eigen::MatrixXd left_unfolding() const;
  /// left x (2 * right) view with column i*right+b.
  Eigen::MatrixXd right_unfolding() const;
  static TtCore from_left_unfolding(const Eigen::MatrixXd& m, int left);
  static TtCore from_right_unfolding(const Eigen::MatrixXd& m, int right);

 private:
  std::size_t index(int a, int i, int b) const {
    return (static_cast<std::size_t>(a) * 2 + static_cast<std::size_t>(i)) * static_cast<std::size_t>(right) +
           static_cast<std::size_t>(b);
  }
};

/// Tensor train for a real vector of length 2^n indexed by k in {0,1}^n. Site
/// 0 is the most significant bit of k.
class TensorTrain {
 public:
  TensorTrain() = default;
  explicit TensorTrain(std::vector<TtCore> cores);

  static TensorTrain zeros(int n);
  static TensorTrain constant(int n, double value);
  /// Rank-1 train with factor (v[l][0], v[l][1]) on site l.
  static TensorTrain product(const std::vector<std::array<double, 2>>& factors);

  int num_sites() const { return static_cast<int>(cores_.size()); }
  const TtCore& core(int l) const { return cores_[static_cast<std::size_t>(l)]; }
  TtCore& core(int l) { return cores_[static_cast<std::size_t>(l)]; }
  const std::vector<TtCore>& cores() const { return cores_; }

  /// Bond dimensions r_1 ... r_{n-1}.
  std::vector<int> ranks() const;
  int max_rank() const;

  double entry(std::uint64_t k) const;
  /// Dense vector, n <= 26.
  Eigen::VectorXd to_dense() const;

 private:
  std::vector<TtCore> cores_;
};

struct Truncation {
  int max_rank = std::numeric_limits<int>::max();
  /// Relative Frobenius error budget spread over the n - 1 truncations.
  double rel_tol = 0.0;
  /// Singular values at or below this value are always dropped.
  double abs_tol = 0.0;
};

struct TtSvdResult {
  TensorTrain tt;
  /// Norm of the discarded singular values at each bond.
  std::vector<double> discarded;
  /// sqrt of the sum of squared discarded norms; bounds the actual error.
  double error_bound = 0.0;
};

/// Sequential reshape-and-SVD sweep, n <= 26.
TtSvdResult tt_svd(const Eigen::VectorXd& v, const Truncation& trunc = {});

TensorTrain tt_add(const TensorTrain& a, const TensorTrain& b);
TensorTrain tt_scale(const TensorTrain& a, double c);
/// Elementwise (Hadamard) product; ranks multiply.
TensorTrain tt_hadamard(const TensorTrain& a, const TensorTrain& b);
double tt_dot(const TensorTrain& a, const TensorTrain& b);
/// Norm via orthogonalization (no cancellation from squaring a dot product).
double tt_norm(const TensorTrain& a);

/// Right-to-left orthogonalization followed by a truncating SVD sweep.
TtSvdResult tt_round(const TensorTrain& a, const Truncation& trunc = {});

/// Left-orthogonalize cores 0..n-2 in place (QR sweep); returns the train.
TensorTrain tt_left_orthogonal(const TensorTrain& a);
/// Right-orthogonalize cores 1..n-1 in place (LQ sweep).
TensorTrain tt_right_orthogonal(const TensorTrain& a);

/// Largest |left_unfolding^T left_unfolding - I| over cores 0..upto-1.
double left_orthogonality_defect(const TensorTrain& a, int upto);
/// Largest |right_unfolding right_unfolding^T - I| over cores from..n-1.
double right_orthogonality_defect(const TensorTrain& a, int from);

}  // namespace rss
