#include "rss/pauli.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace rss {

std::string bitstring(std::uint64_t value, int n) {
  std::string out(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q)
    if (value & qubit_bit(n, q)) out[static_cast<std::size_t>(q)] = '1';
  return out;
}

std::uint64_t parse_bitstring(std::string_view text) {
  if (text.empty() || text.size() > 63) throw std::invalid_argument("bitstring: bad length");
  std::uint64_t value = 0;
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("bitstring: expected only 0 and 1");
    value = (value << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return value;
}

PauliString::PauliString(int n, PauliNorm norm) : n_(n), norm_(norm) {
  if (n < 0 || n > 62) throw std::invalid_argument("PauliString: qubit count out of range");
}

PauliString PauliString::parse(std::string_view text, PauliNorm norm) {
  PauliString p(static_cast<int>(text.size()), norm);
  for (int q = 0; q < p.n_; ++q) {
    switch (text[static_cast<std::size_t>(q)]) {
      case 'I': p.set(q, Pauli::I); break;
      case 'X': p.set(q, Pauli::X); break;
      case 'Y': p.set(q, Pauli::Y); break;
      case 'Z': p.set(q, Pauli::Z); break;
      default: throw std::invalid_argument("PauliString: letters must be I, X, Y or Z");
    }
  }
  return p;
}

PauliString PauliString::from_index(int n, std::uint64_t index, PauliNorm norm) {
  PauliString p(n, norm);
  for (int q = n - 1; q >= 0; --q) {
    p.set(q, static_cast<Pauli>(index & 3u));
    index >>= 2;
  }
  return p;
}

PauliString PauliString::with_normalization(PauliNorm norm) const {
  PauliString p = *this;
  p.norm_ = norm;
  return p;
}

Pauli PauliString::at(int qubit) const {
  if (qubit < 0 || qubit >= n_) throw std::out_of_range("PauliString::at");
  const std::uint64_t b = qubit_bit(n_, qubit);
  const bool x = x_ & b, z = z_ & b;
  if (x && z) return Pauli::Y;
  if (x) return Pauli::X;
  if (z) return Pauli::Z;
  return Pauli::I;
}

void PauliString::set(int qubit, Pauli p) {
  if (qubit < 0 || qubit >= n_) throw std::out_of_range("PauliString::set");
  const std::uint64_t b = qubit_bit(n_, qubit);
  x_ &= ~b;
  z_ &= ~b;
  if (p == Pauli::X || p == Pauli::Y) x_ |= b;
  if (p == Pauli::Z || p == Pauli::Y) z_ |= b;
}

int PauliString::num_y() const { return std::popcount(x_ & z_); }

std::uint64_t PauliString::index() const {
  std::uint64_t idx = 0;
  for (int q = 0; q < n_; ++q) idx = (idx << 2) | static_cast<std::uint64_t>(at(q));
  return idx;
}

std::string PauliString::str() const {
  static constexpr char letters[] = {'I', 'X', 'Y', 'Z'};
  std::string out;
  out.reserve(static_cast<std::size_t>(n_));
  for (int q = 0; q < n_; ++q) out.push_back(letters[static_cast<int>(at(q))]);
  return out;
}

Complex pauli_phase(const PauliString& p, std::uint64_t x) {
  // P = i^{#Y} X^x Z^z with Z applied first.
  static constexpr Complex i_pow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  Complex phase = i_pow[p.num_y() & 3];
  if (std::popcount(x & p.z_mask()) & 1) phase = -phase;
  return phase;
}

Eigen::MatrixXcd PauliString::matrix() const {
  if (n_ > 12) throw std::invalid_argument("PauliString::matrix: n too large for dense form");
  const std::uint64_t dim = std::uint64_t{1} << n_;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  const double scale = norm_ == PauliNorm::frobenius ? 1.0 / std::sqrt(static_cast<double>(dim)) : 1.0;
  for (std::uint64_t x = 0; x < dim; ++x)
    m(static_cast<Eigen::Index>(x ^ x_), static_cast<Eigen::Index>(x)) = scale * pauli_phase(*this, x);
  return m;
}

int IrrepLabel::weight() const { return std::popcount(bits); }

IrrepLabel irrep_label(const PauliString& p) { return {p.num_qubits(), p.x_mask() | p.z_mask()}; }

int pauli_weight(const IrrepLabel& k) { return k.weight(); }
int pauli_weight(std::uint64_t k) { return std::popcount(k); }

void walsh_hadamard_inplace(std::span<double> values) {
  const std::size_t dim = values.size();
  if (dim == 0 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("walsh_hadamard: length must be a power of two");
  for (std::size_t half = 1; half < dim; half <<= 1) {
    for (std::size_t base = 0; base < dim; base += 2 * half) {
      for (std::size_t j = base; j < base + half; ++j) {
        const double a = values[j];
        const double b = values[j + half];
        values[j] = a + b;
        values[j + half] = a - b;
      }
    }
  }
}

Eigen::VectorXd walsh_hadamard(const Eigen::VectorXd& p) {
  Eigen::VectorXd out = p;
  walsh_hadamard_inplace(std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

}  // namespace rss
