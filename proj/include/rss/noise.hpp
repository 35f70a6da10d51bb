#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rss/state.hpp"

namespace rss {

class Rng;

/// Pauli channel on 1 or 2 qubits. Two-qubit labels are 4*a + b where a is
/// the letter on the first (control) qubit and b on the second (target).
struct PauliChannel {
  int arity = 1;
  std::vector<double> probs{1.0, 0.0, 0.0, 0.0};

  static PauliChannel identity(int arity);
  /// Total error probability p spread uniformly over the non-identity labels.
  static PauliChannel depolarizing(int arity, double p);

  void validate() const;
  bool is_identity() const;
  /// Pauli-transfer eigenvalue of every label: sum_Q p_Q (-1)^{[P,Q] != 0}.
  std::vector<double> transfer_eigenvalues() const;
};

/// Classical readout confusion for one qubit.
struct Readout {
  double p10 = 0.0;  // P(read 1 | true 0)
  double p01 = 0.0;  // P(read 0 | true 1)
  bool operator==(const Readout&) const = default;
};

enum class TwoQubitNoise { none, gue, pauli };

struct NoiseModel {
  TwoQubitNoise two_qubit = TwoQubitNoise::none;
  double gamma = 0.0;
  PauliChannel two_qubit_channel = PauliChannel::identity(2);
  /// Gate-dependent single-qubit channels; empty means no single-qubit noise.
  std::vector<PauliChannel> single_qubit_channels;
  /// Empty: ideal readout; one entry: shared by all qubits; else one per qubit.
  std::vector<Readout> readout;
  bool first_layer_ideal = true;

  static NoiseModel noiseless() { return {}; }

  void validate(int n) const;
  bool is_noiseless() const;
  /// True when every noise source is a Pauli channel (exact channel simulation
  /// and the channel-level frame construction apply).
  bool is_pauli() const;
  bool has_pauli_channels() const;
  Readout readout_for(int qubit) const;
  /// Channel attached to a single-qubit gate; nullptr if none. Clifford gates
  /// pick a channel by a fixed hash of their canonical index, every other
  /// gate uses channel 0.
  const PauliChannel* channel_for_gate(int clifford_index) const;
};

/// Hermitian matrix with N(0,1) diagonal and complex N(0,1/2)+iN(0,1/2)
/// off-diagonal entries.
Eigen::MatrixXcd sample_gue(int dim, Rng& rng);

/// exp(i gamma H / 8) with a fresh 4x4 GUE draw H.
Eigen::Matrix4cd incoherent_noise_unitary(double gamma, Rng& rng);
Eigen::Matrix4cd incoherent_noise_unitary(double gamma, const Eigen::MatrixXcd& hamiltonian);

/// Average gate infidelity of a unitary error: (d^2 - |Tr U|^2) / (d (d + 1)).
double infidelity_of_unitary(const Eigen::MatrixXcd& u);

/// Monte-Carlo mean infidelity of exp(i gamma H / 8) over the given GUE spectra.
double mean_incoherent_infidelity(double gamma, std::span<const Eigen::Vector4d> spectra);

/// Bisection for gamma reproducing the target mean CNOT infidelity; the same
/// `samples` GUE draws are reused at every step.
double calibrate_gamma(double r_target, int samples, Rng& rng);

/// One Pauli label drawn from the channel's distribution.
int sample_pauli_label(const PauliChannel& channel, Rng& rng);
PauliString pauli_label_string(int n, std::span<const int> sites, int label);

void apply_pauli_label(DenseState& state, std::span<const int> sites, int label);
void apply_unitary_event(DenseState& state, std::span<const int> sites, const Eigen::MatrixXcd& u);

/// Independent per-qubit readout flips of an ideal outcome.
std::uint64_t apply_readout(std::uint64_t z, int n, const NoiseModel& noise, Rng& rng);

/// p~(z) = sum_z' P(z|z') p(z'), applied qubit by qubit.
void apply_readout_confusion(std::span<double> probs, int n, const NoiseModel& noise);

}  // namespace rss
