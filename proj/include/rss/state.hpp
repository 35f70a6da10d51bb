#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Dense>

#include "rss/pauli.hpp"

namespace rss {

class Rng;

// Gate kernels on raw amplitude arrays of length 2^n. Shared by the state
// vector and the density-matrix paths (which apply them column by column).
namespace kernels {
void apply_1q(std::span<Complex> amps, int n, const Eigen::Matrix2cd& u, int qubit);
/// `u` acts on |q0 q1> with q0 the more significant factor.
void apply_2q(std::span<Complex> amps, int n, const Eigen::Matrix4cd& u, int q0, int q1);
void apply_cnot(std::span<Complex> amps, int n, int control, int target);
void apply_pauli(std::span<Complex> amps, const PauliString& p);
}  // namespace kernels

/// Pure n-qubit state. Norm is kept at 1 by construction; only unitary
/// operations are exposed.
class DenseState {
 public:
  DenseState() = default;
  /// |0...0>
  explicit DenseState(int n);

  static DenseState basis(int n, std::uint64_t index);
  /// Normalizes the given amplitudes; throws on a zero vector or bad length.
  static DenseState from_amplitudes(Eigen::VectorXcd amplitudes);
  /// Haar-random pure state from a normalized complex Gaussian vector.
  static DenseState haar_random(int n, Rng& rng);

  int num_qubits() const { return n_; }
  std::uint64_t dim() const { return std::uint64_t{1} << n_; }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Complex amplitude(std::uint64_t index) const { return amps_[static_cast<Eigen::Index>(index)]; }

  void apply_1q(const Eigen::Matrix2cd& u, int qubit);
  void apply_2q(const Eigen::Matrix4cd& u, int q0, int q1);
  void apply_cnot(int control, int target);
  void apply_pauli(const PauliString& p);

  double norm2() const { return amps_.squaredNorm(); }
  Eigen::VectorXd probabilities() const;
  Complex inner(const DenseState& other) const;

 private:
  std::span<Complex> span() { return {amps_.data(), static_cast<std::size_t>(amps_.size())}; }

  int n_ = 0;
  Eigen::VectorXcd amps_;
};

/// <s|O_p|s> with the unit-operator-norm Pauli O_p, whatever the string's
/// normalization flag.
double pauli_expectation(const DenseState& s, const PauliString& p);

}  // namespace rss
