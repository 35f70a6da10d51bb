#include "rss/state.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "rss/rng.hpp"

namespace rss {
namespace kernels {

void apply_1q(std::span<Complex> amps, int n, const Eigen::Matrix2cd& u, int qubit) {
  if (qubit < 0 || qubit >= n) throw std::out_of_range("apply_1q: qubit out of range");
  const std::size_t dim = amps.size();
  const std::size_t m = static_cast<std::size_t>(qubit_bit(n, qubit));
  const Complex u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
  for (std::size_t base = 0; base < dim; base += 2 * m) {
    for (std::size_t i = base; i < base + m; ++i) {
      const Complex a = amps[i];
      const Complex b = amps[i + m];
      amps[i] = u00 * a + u01 * b;
      amps[i + m] = u10 * a + u11 * b;
    }
  }
}

void apply_2q(std::span<Complex> amps, int n, const Eigen::Matrix4cd& u, int q0, int q1) {
  if (q0 < 0 || q0 >= n || q1 < 0 || q1 >= n || q0 == q1)
    throw std::out_of_range("apply_2q: invalid qubit pair");
  const std::size_t m0 = static_cast<std::size_t>(qubit_bit(n, q0));
  const std::size_t m1 = static_cast<std::size_t>(qubit_bit(n, q1));
  const std::size_t offsets[4] = {0, m1, m0, m0 | m1};
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (i & (m0 | m1)) continue;
    Complex in[4];
    for (int a = 0; a < 4; ++a) in[a] = amps[i | offsets[a]];
    for (int a = 0; a < 4; ++a) {
      Complex acc = 0;
      for (int b = 0; b < 4; ++b) acc += u(a, b) * in[b];
      amps[i | offsets[a]] = acc;
    }
  }
}

void apply_cnot(std::span<Complex> amps, int n, int control, int target) {
  if (control < 0 || control >= n || target < 0 || target >= n || control == target)
    throw std::out_of_range("apply_cnot: invalid qubit pair");
  const std::size_t mc = static_cast<std::size_t>(qubit_bit(n, control));
  const std::size_t mt = static_cast<std::size_t>(qubit_bit(n, target));
  for (std::size_t i = 0; i < amps.size(); ++i)
    if ((i & mc) && !(i & mt)) std::swap(amps[i], amps[i | mt]);
}

void apply_pauli(std::span<Complex> amps, const PauliString& p) {
  const std::uint64_t xm = p.x_mask();
  if (xm == 0) {
    for (std::size_t i = 0; i < amps.size(); ++i) amps[i] *= pauli_phase(p, i);
    return;
  }
  // P|x> = phase(x)|x^xm>: handle each pair (x, x^xm) once.
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const std::size_t j = i ^ xm;
    if (j < i) continue;
    const Complex a = amps[i];
    const Complex b = amps[j];
    amps[j] = pauli_phase(p, i) * a;
    amps[i] = pauli_phase(p, j) * b;
  }
}

}  // namespace kernels

DenseState::DenseState(int n) : n_(n) {
  if (n < 0 || n > 30) throw std::invalid_argument("DenseState: qubit count out of range");
  amps_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim()));
  amps_[0] = 1.0;
}

DenseState DenseState::basis(int n, std::uint64_t index) {
  DenseState s(n);
  if (index >= s.dim()) throw std::out_of_range("DenseState::basis: index out of range");
  s.amps_[0] = 0.0;
  s.amps_[static_cast<Eigen::Index>(index)] = 1.0;
  return s;
}

DenseState DenseState::from_amplitudes(Eigen::VectorXcd amplitudes) {
  const auto size = static_cast<std::uint64_t>(amplitudes.size());
  if (size == 0 || (size & (size - 1)) != 0)
    throw std::invalid_argument("DenseState: amplitude count must be a power of two");
  const double norm = amplitudes.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("DenseState: zero amplitude vector");
  DenseState s;
  s.n_ = std::countr_zero(size);
  s.amps_ = amplitudes / norm;
  return s;
}

DenseState DenseState::haar_random(int n, Rng& rng) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(std::uint64_t{1} << n));
  for (auto& a : v) {
    const double re = rng.normal();
    const double im = rng.normal();
    a = Complex(re, im);
  }
  return from_amplitudes(std::move(v));
}

void DenseState::apply_1q(const Eigen::Matrix2cd& u, int qubit) { kernels::apply_1q(span(), n_, u, qubit); }
void DenseState::apply_2q(const Eigen::Matrix4cd& u, int q0, int q1) { kernels::apply_2q(span(), n_, u, q0, q1); }
void DenseState::apply_cnot(int control, int target) { kernels::apply_cnot(span(), n_, control, target); }

void DenseState::apply_pauli(const PauliString& p) {
  if (p.num_qubits() != n_) throw std::invalid_argument("apply_pauli: qubit count mismatch");
  kernels::apply_pauli(span(), p);
}

Eigen::VectorXd DenseState::probabilities() const { return amps_.cwiseAbs2(); }

Complex DenseState::inner(const DenseState& other) const {
  if (other.n_ != n_) throw std::invalid_argument("DenseState::inner: qubit count mismatch");
  return amps_.dot(other.amps_);
}

double pauli_expectation(const DenseState& s, const PauliString& p) {
  if (p.num_qubits() != s.num_qubits())
    throw std::invalid_argument("pauli_expectation: qubit count mismatch");
  const std::uint64_t xm = p.x_mask();
  Complex acc = 0;
  for (std::uint64_t x = 0; x < s.dim(); ++x)
    acc += std::conj(s.amplitude(x ^ xm)) * pauli_phase(p, x) * s.amplitude(x);
  return acc.real();
}

}  // namespace rss
