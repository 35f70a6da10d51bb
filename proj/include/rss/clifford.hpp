#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rss/pauli.hpp"

namespace rss {

class Rng;

struct SingleQubitClifford {
  Eigen::Matrix2cd matrix;
  /// Conjugation action U P U^dagger = sign[p] * image[p], indexed by Pauli letter.
  std::array<Pauli, 4> image;
  std::array<int, 4> sign;
};

/// The 24 single-qubit Cliffords modulo global phase in canonical order:
/// generated from H and S, phase-normalized so that the first nonzero entry
/// (row-major) is real positive, then sorted by the rounded entries.
const std::vector<SingleQubitClifford>& single_qubit_cliffords();

/// Index into single_qubit_cliffords() equal to `u` up to phase, or -1.
int find_single_qubit_clifford(const Eigen::Matrix2cd& u, double tol = 1e-9);

/// The 11520 two-qubit Cliffords modulo phase, canonical order as above.
const std::vector<Eigen::Matrix4cd>& two_qubit_cliffords();

/// Haar-distributed element of U(2).
Eigen::Matrix2cd haar_unitary_2x2(Rng& rng);

bool is_unitary(const Eigen::MatrixXcd& u, double tol);

}  // namespace rss
