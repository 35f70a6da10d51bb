#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "rss/calibration.hpp"
#include "rss/noise.hpp"

namespace rss {

enum class IdealEnsemble { local_clifford_d0, global_clifford };

/// Analytic spectra: 3^{-|k|} for one layer of local Cliffords; 1 at k = 0 and
/// 1/(2^n + 1) elsewhere for the global Clifford group.
FrameSpectrum ideal_f(int n, IdealEnsemble ensemble);

struct FrameEnsemble {
  int n = 1;
  int depth = 0;
  Ensemble ensemble = Ensemble::clifford1q;
  std::string topology_id = "brickwork-open";
  /// Use uniformly random global Cliffords instead (n <= 2, readout noise only).
  bool global_clifford = false;
};

struct ExactFrameOptions {
  /// Average over the whole group when it is small enough (n = 1, or n = 2 at
  /// D = 0, or the 11520 two-qubit Cliffords).
  bool enumerate = true;
  int circuit_samples = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
};

/// Shot-free frame spectrum: sum_z p~(z|g) phi(z, g) averaged over circuits,
/// with exact noisy outcome distributions (n <= 8). With sampled circuits the
/// standard error is the circuit-sampling error. Circuits and GUE draws come
/// from separate streams, so noisy and noiseless calls share their circuits.
FrameSpectrum exact_f(const FrameEnsemble& ens, const NoiseModel& noise, const ExactFrameOptions& opt = {});

/// Circuit number `index` of the sampled average in exact_f.
Circuit oracle_circuit(const FrameEnsemble& ens, std::uint64_t seed, std::uint64_t index);
/// GUE draws paired with oracle_circuit(ens, seed, index).
UnitaryEvents oracle_events(const Circuit& c, const NoiseModel& noise, std::uint64_t seed, std::uint64_t index);

/// sum_z p~(z|g) phi(z, g) for one circuit, from the exact noisy distribution.
Eigen::VectorXd exact_phi_average(const Circuit& c, const NoiseModel& noise, const UnitaryEvents* events = nullptr);

/// Channel-level construction for local Pauli noise: the measurement channel
/// is pulled through the circuit layer by layer in the diagonal Pauli-transfer
/// representation, each single-qubit layer acting as a (noisy) twirl and each
/// CNOT as a label permutation. Exact; TT ranks at most 4^D on open chains.
/// Haar gates see single-qubit channel 0; Clifford gates their assigned
/// channel. A noisy first layer must be gate-independent.
TensorTrain exact_f_tt_pauli_noise(const NoiseModel& noise, const Topology& topology, int depth,
                                   Ensemble ensemble = Ensemble::clifford1q);

struct DiagonalityReport {
  /// Averaged superoperator in the Frobenius-normalized Pauli basis.
  Eigen::MatrixXd mean;
  Eigen::MatrixXd se;
  double max_offdiag = 0.0;
  /// Largest deviation of a diagonal entry from the mean of its irrep block.
  double max_spread = 0.0;
  double threshold = 0.0;
  double spread_threshold = 0.0;
  bool diagonal = false;
};

/// Builds E_g sum_z |Pi_{z,g})(Pi~_{z,g}| densely for n <= 3 and tests that
/// it is diagonal and constant on each irrep label, within 4 standard errors.
DiagonalityReport frame_diagonality(const FrameEnsemble& ens, const NoiseModel& noise, const ExactFrameOptions& opt = {});

}  // namespace rss
