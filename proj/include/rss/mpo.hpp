#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rss/circuit.hpp"

namespace rss {

/// Order-4 complex core W[a][out][in][b] with physical dimension 2.
struct MpoCore {
  int bond_in = 1;
  int bond_out = 1;
  std::vector<Complex> data;

  MpoCore() = default;
  MpoCore(int left, int right) : bond_in(left), bond_out(right), data(static_cast<std::size_t>(left * right * 4)) {}

  Complex& operator()(int a, int out, int in, int b) { return data[index(a, out, in, b)]; }
  Complex operator()(int a, int out, int in, int b) const { return data[index(a, out, in, b)]; }

 private:
  std::size_t index(int a, int out, int in, int b) const {
    return static_cast<std::size_t>(((a * 2 + out) * 2 + in) * bond_out + b);
  }
};

/// Matrix-product operator on a chain. With a periodic boundary the bond
/// leaving the last site re-enters the first one and contraction takes the
/// trace over it; otherwise both boundary bonds have size 1.
class Mpo {
 public:
  Mpo() = default;
  Mpo(std::vector<MpoCore> cores, bool periodic);

  static Mpo identity(int n);

  int num_sites() const { return static_cast<int>(cores_.size()); }
  bool periodic() const { return periodic_; }
  const MpoCore& core(int l) const { return cores_[static_cast<std::size_t>(l)]; }
  int max_bond() const;

  /// Operator product (*this) * other; `other` acts first.
  Mpo times(const Mpo& other) const;
  /// Equivalent open-boundary MPO: a traced boundary bond is threaded
  /// through every site.
  Mpo to_open() const;
  /// Dense 2^n x 2^n operator, n <= 12.
  Eigen::MatrixXcd to_dense() const;

 private:
  std::vector<MpoCore> cores_;
  bool periodic_ = false;
};

/// Bond-dimension-2 MPO of a single CNOT. The bond runs over the control value
/// between the two sites; a wrap-around gate of a periodic chain carries it
/// across the boundary instead.
Mpo cnot_mpo(int n, const EntanglingPair& pair, bool wrap);

/// MPO of one entangling sub-layer: product of the per-gate MPOs.
Mpo cnot_layer_mpo(const Topology& topology, int pattern_index);

}  // namespace rss
