#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rss/tensor_train.hpp"

namespace rss {

struct MalsOptions {
  int max_rank = 8;
  int max_sweeps = 30;
  /// Stop when a full sweep improves the residual by less than tol (relative).
  double tol = 1e-10;
  /// Singular values below rel_cutoff * largest are dropped when splitting.
  double rel_cutoff = 1e-8;
  /// Singular values at or below this absolute level are dropped as well
  /// (noise-floor truncation for statistically noisy targets; 0 disables).
  double abs_cutoff = 0.0;
  /// Pseudo-inverse cutoff for the local Gram matrices.
  double pinv_cutoff = 1e-10;
};

struct MalsResult {
  TensorTrain tt;
  double residual = 0.0;
  double relative_residual = 0.0;
  int sweeps = 0;
  bool converged = false;
  /// Residual after each full (left-right-left) sweep, starting with the init.
  std::vector<double> residual_history;
};

/// Two-site alternating least squares fit of `target` within TT rank max_rank.
/// Returns the best iterate; `converged` is false when the sweep budget ran out.
MalsResult mals_fit(const TensorTrain& target, const TensorTrain& init, const MalsOptions& opt);
/// Dense target (n <= 20), converted to an exact TT first.
MalsResult mals_fit(const Eigen::VectorXd& target, const TensorTrain& init, const MalsOptions& opt);

struct InverseFit {
  TensorTrain tt;
  /// max |g_k f_k - 1| over the probed k.
  double probe_error = 0.0;
  int probes = 0;
  MalsResult fit;
};

/// Low-rank TT g with g_k ~ 1/f_k. Dense path (n <= 20): checks the guard on
/// every entry, inverts elementwise, compresses by TT-SVD and refines by MALS.
/// The error is measured on min(2^n, probes) k drawn with `probe_seed`.
InverseFit tt_elementwise_inverse_fit(const TensorTrain& f, int max_rank, double guard, int probes = 10000,
                                      std::uint64_t probe_seed = 1);

}  // namespace rss
