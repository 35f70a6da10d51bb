#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rss/calibration.hpp"
#include "rss/simulator.hpp"

namespace rss {

/// Either a real combination of unit-norm Pauli strings or a pure-state
/// projector |psi><psi|.
struct Observable {
  std::string id;
  std::vector<std::pair<double, PauliString>> terms;
  std::optional<DenseState> target;

  static Observable pauli_sum(std::vector<std::pair<double, PauliString>> terms, std::string id = {});
  static Observable pure_target(DenseState psi, std::string id = {});
  /// "ZZI", "0.5*ZZI+XIX" or "-1*XX" (Pauli sums only).
  static Observable parse(std::string_view text);

  int num_qubits() const;
  /// Dense operator (n <= 12).
  Eigen::MatrixXcd matrix() const;
};

struct Estimate {
  std::string observable;
  double value = 0.0;
  double se = 0.0;
  std::uint64_t shots = 0;
  std::string frame;
  /// Max inversion error of a TT inverse frame, NaN when dense inversion is used.
  double inverse_probe_error = std::numeric_limits<double>::quiet_NaN();
};

/// sum_k s_k Phi_k applied to an operator, i.e. each Pauli component of x is
/// multiplied by s at its support label (n <= 12).
Eigen::MatrixXcd apply_frame_function(const Eigen::MatrixXcd& x, const Eigen::VectorXd& s);
/// Squared Frobenius weight of x on each irrep label k.
Eigen::VectorXd sector_weights(const Eigen::MatrixXcd& x);

struct DualOptions {
  double guard_factor = 10.0;
  /// Invert flagged (statistically zero) sectors anyway.
  bool allow_flagged = false;
  /// Use a low-rank TT fit of 1/f instead of the dense reciprocal.
  bool tt_inverse = false;
  int inverse_rank = 16;
};

/// o(z, g) = (O | S^{-1} | Pi_{z,g}) for a fixed observable and frame.
class DualEvaluator {
 public:
  DualEvaluator(const Observable& obs, const FrameSpectrum& frame, const DualOptions& opt = {});
  double operator()(const Circuit& c, std::uint64_t z) const;
  double operator()(const ShadowRecord& r) const { return (*this)(r.circuit, r.z); }
  double inverse_probe_error() const { return probe_error_; }

 private:
  int n_ = 0;
  std::vector<std::pair<double, PauliString>> scaled_terms_;
  Eigen::MatrixXcd dual_operator_;
  bool pure_ = false;
  double probe_error_ = std::numeric_limits<double>::quiet_NaN();
};

double dual_eval(const Observable& obs, const ShadowRecord& record, const FrameSpectrum& frame,
                 const DualOptions& opt = {});

/// Mean and standard error of per-record values.
Estimate summarize(std::span<const double> values, std::string observable, std::string frame);
/// Median of `batches` contiguous batch means (non-default robust variant);
/// se is the standard error of the batch means.
Estimate summarize_median_of_means(std::span<const double> values, int batches, std::string observable,
                                   std::string frame);

Estimate estimate(const Observable& obs, std::span<const ShadowRecord> records, const FrameSpectrum& frame,
                  const DualOptions& opt = {});

/// max over k != 0 of |1 - f_noisy(k) / f_ideal(k)|.
double worst_case_bias(const FrameSpectrum& f_ideal, const FrameSpectrum& f_noisy);
/// Same maximum restricted to labels of Pauli weight `support`.
double worst_case_bias_by_support(const FrameSpectrum& f_ideal, const FrameSpectrum& f_noisy, int support);
/// Same maximum over an explicit label set.
double worst_case_bias_over(const FrameSpectrum& f_ideal, const FrameSpectrum& f_noisy,
                            std::span<const std::uint64_t> labels);

/// |(O|rho) - (O|S^{-1} S~|rho)| for a pure state rho (n <= 12).
double bias_of_estimation(const Observable& obs, const DenseState& state, const FrameSpectrum& f_ideal,
                          const FrameSpectrum& f_noisy);

}  // namespace rss
