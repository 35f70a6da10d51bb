#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace rss {

using Complex = std::complex<double>;

// Bit convention used everywhere: qubit 0 is the most significant bit of a
// basis index, of an irrep label k and of every printed bitstring.
inline std::uint64_t qubit_bit(int n, int qubit) { return std::uint64_t{1} << (n - 1 - qubit); }

std::string bitstring(std::uint64_t value, int n);
std::uint64_t parse_bitstring(std::string_view text);

/// Single-qubit Pauli letter. The numeric order is the order of per-qubit
/// 4-vectors in Pauli-transfer computations.
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// unit_operator: O_a with eigenvalues +-1. frobenius: w_a = O_a / sqrt(d).
enum class PauliNorm { unit_operator, frobenius };

class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(int n, PauliNorm norm = PauliNorm::unit_operator);

  /// Text form over {I,X,Y,Z}, leftmost character is qubit 0.
  static PauliString parse(std::string_view text, PauliNorm norm = PauliNorm::unit_operator);
  /// Base-4 digits of `index` (qubit 0 most significant) select the letters.
  static PauliString from_index(int n, std::uint64_t index, PauliNorm norm = PauliNorm::unit_operator);

  int num_qubits() const { return n_; }
  PauliNorm normalization() const { return norm_; }
  PauliString with_normalization(PauliNorm norm) const;

  Pauli at(int qubit) const;
  void set(int qubit, Pauli p);

  // Symplectic representation with basis-index bit layout.
  std::uint64_t x_mask() const { return x_; }
  std::uint64_t z_mask() const { return z_; }
  int num_y() const;

  std::uint64_t index() const;
  std::string str() const;

  /// Dense 2^n x 2^n matrix including the normalization factor (n <= 12).
  Eigen::MatrixXcd matrix() const;

  bool operator==(const PauliString& other) const = default;

 private:
  int n_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
  PauliNorm norm_ = PauliNorm::unit_operator;
};

/// Support pattern of a Pauli string: bit of qubit l is 1 iff the letter is not I.
struct IrrepLabel {
  int n = 0;
  std::uint64_t bits = 0;

  int weight() const;
  std::string str() const { return bitstring(bits, n); }
  bool operator==(const IrrepLabel&) const = default;
};

IrrepLabel irrep_label(const PauliString& p);
int pauli_weight(const IrrepLabel& k);
int pauli_weight(std::uint64_t k);

/// In place fast transform: out_k = sum_x (-1)^{popcount(k & x)} in_x.
void walsh_hadamard_inplace(std::span<double> values);
Eigen::VectorXd walsh_hadamard(const Eigen::VectorXd& p);

/// Phase picked up by basis state |x> under P: P|x> = phase * |x ^ x_mask>.
Complex pauli_phase(const PauliString& p, std::uint64_t x);

}  // namespace rss
