#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rss/state.hpp"

namespace rss {

class Rng;

enum class Boundary { open, periodic };
enum class Ensemble { haar, clifford1q };

std::string to_string(Ensemble e);
Ensemble parse_ensemble(std::string_view text);

struct EntanglingPair {
  int control = 0;
  int target = 0;
  bool operator==(const EntanglingPair&) const = default;
};

/// Qubit count plus the list of entangling sub-layer patterns. Layer j >= 1 of
/// a circuit uses pattern (j - 1) mod pattern count.
class Topology {
 public:
  Topology() = default;
  Topology(int n, std::vector<std::vector<EntanglingPair>> sublayers, Boundary boundary, std::string id);

  /// Linear chain: pattern 0 = (0,1),(2,3),..., pattern 1 = (1,2),(3,4),...
  /// Periodic chains (even n) close pattern 1 with (n-1, 0). Control is the
  /// lower chain position.
  static Topology brickwork(int n, Boundary boundary = Boundary::open);
  /// Independent open brickwork chains on consecutive blocks of `block` qubits.
  static Topology blocks(int n, int block);
  /// Inverse of id(): "brickwork-open", "brickwork-periodic", "blocks-<b>".
  static Topology from_id(int n, std::string_view id);

  int num_qubits() const { return n_; }
  Boundary boundary() const { return boundary_; }
  const std::string& id() const { return id_; }
  int num_patterns() const { return static_cast<int>(sublayers_.size()); }
  const std::vector<EntanglingPair>& pattern(int index) const;
  int pattern_index_for_layer(int layer) const;

  /// True if `pair` closes a periodic chain (spans qubits 0 and n-1, n > 2).
  bool is_wrap(const EntanglingPair& pair) const;

 private:
  int n_ = 0;
  std::vector<std::vector<EntanglingPair>> sublayers_;
  Boundary boundary_ = Boundary::open;
  std::string id_;
};

/// D+1 single-qubit layers interleaved with D entangling sub-layers.
/// layers[0] acts first on the input state; entanglers[j-1] precedes layers[j].
struct Circuit {
  int n = 0;
  int depth = 0;
  Ensemble ensemble = Ensemble::clifford1q;
  std::string topology_id;
  std::uint64_t seed = 0;
  std::vector<std::vector<Eigen::Matrix2cd>> layers;
  /// Same shape as layers; canonical Clifford index or -1.
  std::vector<std::vector<int>> clifford_index;
  std::vector<std::vector<EntanglingPair>> entanglers;

  void validate() const;
  /// Fill clifford_index by matching gates against the canonical table.
  void identify_cliffords();
};

Circuit sample_circuit(int n, int depth, Ensemble ensemble, const Topology& topology, Rng& rng);

/// Circuit with every single-qubit gate equal to the identity.
Circuit identity_circuit(int n, int depth, const Topology& topology);

void apply_circuit(DenseState& state, const Circuit& c);
void apply_circuit_adjoint(DenseState& state, const Circuit& c);

/// Dense unitary in application order; n <= 12.
Eigen::MatrixXcd circuit_unitary(const Circuit& c);

/// Dense unitary of one entangling sub-layer; n <= 12.
Eigen::MatrixXcd entangling_layer_unitary(const Topology& topology, int pattern_index);

}  // namespace rss
