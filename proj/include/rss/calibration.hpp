#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rss/circuit.hpp"
#include "rss/simulator.hpp"
#include "rss/tensor_train.hpp"

namespace rss {

enum class FrameProvenance { empirical, exact_oracle, analytic, tt_fit };
std::string to_string(FrameProvenance p);
FrameProvenance parse_provenance(std::string_view text);

/// Coefficients f_k of a Pauli-diagonal frame operator, S = sum_k f_k Phi_k.
struct FrameSpectrum {
  int n = 0;
  /// Dense values indexed by k (empty for a TT-only spectrum).
  Eigen::VectorXd f;
  /// Per-entry standard error (empty when unknown).
  Eigen::VectorXd se;
  std::optional<TensorTrain> tt;
  FrameProvenance provenance = FrameProvenance::empirical;
  std::uint64_t samples = 0;

  static FrameSpectrum dense(Eigen::VectorXd values, FrameProvenance p, Eigen::VectorXd stderrs = {});
  static FrameSpectrum from_tt(TensorTrain t, FrameProvenance p);

  bool has_dense() const { return f.size() > 0; }
  double value(std::uint64_t k) const;
  double stderr_at(std::uint64_t k) const;
  /// Dense values, expanding the TT if necessary (n <= 20).
  Eigen::VectorXd values() const;
  /// Entries with |f_k| <= guard_factor * se_k (or f_k == 0) are flagged.
  std::vector<std::uint64_t> flagged(double guard_factor = 10.0) const;

  /// Frame of two independent registers: this one on the leading qubits.
  FrameSpectrum tensor(const FrameSpectrum& other) const;
};

/// |chi> = g^dagger |z>.
DenseState chi_state(const Circuit& c, std::uint64_t z);

/// phi_k(z, g) = <chi|Z_k|chi> for all k, via the Walsh-Hadamard transform of
/// |chi_x|^2 (n <= 20).
Eigen::VectorXd phi_dense(const Circuit& c, std::uint64_t z);
/// Same values from the Pauli expectations directly (n <= 10); test oracle.
Eigen::VectorXd phi_direct(const Circuit& c, std::uint64_t z);
/// Tensor-train form built from an MPS of |chi> with the CNOT-layer MPOs;
/// ranks are at most 4^D for open chains.
TensorTrain phi_tt(const Circuit& c, std::uint64_t z);

/// Running sums of phi vectors. Merging chunk accumulators in chunk order
/// gives results independent of the thread count.
class FrameAccumulator {
 public:
  explicit FrameAccumulator(int n = 0);
  void add(const Eigen::VectorXd& phi);
  void merge(const FrameAccumulator& other);
  std::uint64_t count() const { return count_; }
  /// Empirical mean with per-entry standard error.
  FrameSpectrum result() const;

 private:
  int n_;
  std::uint64_t count_ = 0;
  Eigen::VectorXd sum_;
  Eigen::VectorXd sum_sq_;
};

/// Poisson bootstrap over a record stream: each record enters replicate b with
/// a Poisson(1) weight drawn from a stream keyed by (seed, record index).
class BootstrapAccumulator {
 public:
  BootstrapAccumulator(int n, int replicates, std::uint64_t seed);
  void add(std::uint64_t record_index, const Eigen::VectorXd& phi);
  void merge(const BootstrapAccumulator& other);
  /// Replicate means, one column per replicate.
  Eigen::MatrixXd replicate_means() const;
  int replicates() const { return static_cast<int>(weights_.size()); }

 private:
  std::uint64_t seed_;
  Eigen::MatrixXd sums_;
  std::vector<double> weights_;
};

enum class CalibrationMode { dense, tt };
std::string to_string(CalibrationMode m);
CalibrationMode parse_calibration_mode(std::string_view text);

struct CalibrationOptions {
  CalibrationMode mode = CalibrationMode::dense;
  int chi = 8;
  /// Build the mean as a streamed sum of phi TTs instead of densely.
  bool streamed = false;
  int batch = 64;
  double round_tol = 1e-12;
  /// Passed to the MALS split as its absolute singular-value cutoff.
  double noise_floor = 0.0;
  int threads = 0;
};

/// Mean of phi over records from the zero input state. Dense mode returns
/// means and standard errors; tt mode fits a rank-chi TT to the mean by MALS
/// initialized with the ideal local-Clifford spectrum.
FrameSpectrum estimate_f(const RecordHeader& header, std::span<const ShadowRecord> records,
                         const CalibrationOptions& opt = {});

/// Same as estimate_f on records generated on the fly from `spec`.
FrameSpectrum calibrate(const AcquisitionSpec& spec, const CalibrationOptions& opt = {});

/// Empirical mean plus Poisson-bootstrap replicate means from generated records.
struct BootstrappedFrame {
  FrameSpectrum frame;
  Eigen::MatrixXd replicates;
};
BootstrappedFrame calibrate_with_bootstrap(const AcquisitionSpec& spec, int replicates, std::uint64_t bootstrap_seed,
                                           int threads = 0);

/// One representative label per Pauli support size 1..n: the first ps qubits.
std::vector<std::uint64_t> histogram_labels(int n);

}  // namespace rss
