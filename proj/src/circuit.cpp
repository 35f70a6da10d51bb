#include "rss/circuit.hpp"

#include <set>
#include <stdexcept>

#include "rss/clifford.hpp"
#include "rss/rng.hpp"

namespace rss {

std::string to_string(Ensemble e) { return e == Ensemble::haar ? "haar" : "clifford1q"; }

Ensemble parse_ensemble(std::string_view text) {
  if (text == "haar") return Ensemble::haar;
  if (text == "clifford1q" || text == "clifford") return Ensemble::clifford1q;
  throw std::invalid_argument("unknown ensemble tag: " + std::string(text));
}

Topology::Topology(int n, std::vector<std::vector<EntanglingPair>> sublayers, Boundary boundary, std::string id)
    : n_(n), sublayers_(std::move(sublayers)), boundary_(boundary), id_(std::move(id)) {
  if (n < 1) throw std::invalid_argument("Topology: need at least one qubit");
  for (const auto& layer : sublayers_) {
    std::set<int> used;
    for (const auto& p : layer) {
      if (p.control < 0 || p.control >= n || p.target < 0 || p.target >= n)
        throw std::invalid_argument("Topology: qubit index out of range");
      if (p.control == p.target) throw std::invalid_argument("Topology: control equals target");
      if (!used.insert(p.control).second || !used.insert(p.target).second)
        throw std::invalid_argument("Topology: qubit used twice within a sub-layer");
    }
  }
}

Topology Topology::brickwork(int n, Boundary boundary) {
  if (boundary == Boundary::periodic && n % 2 != 0)
    throw std::invalid_argument("Topology: periodic brickwork needs even n");
  std::vector<EntanglingPair> even, odd;
  for (int q = 0; q + 1 < n; q += 2) even.push_back({q, q + 1});
  for (int q = 1; q + 1 < n; q += 2) odd.push_back({q, q + 1});
  if (boundary == Boundary::periodic && n > 2) odd.push_back({n - 1, 0});
  std::vector<std::vector<EntanglingPair>> layers{even};
  if (!odd.empty()) layers.push_back(odd);
  return Topology(n, std::move(layers), boundary,
                  boundary == Boundary::open ? "brickwork-open" : "brickwork-periodic");
}

Topology Topology::blocks(int n, int block) {
  if (block < 1 || n % block != 0) throw std::invalid_argument("Topology: n must be a multiple of the block size");
  std::vector<EntanglingPair> even, odd;
  for (int start = 0; start < n; start += block) {
    for (int q = 0; q + 1 < block; q += 2) even.push_back({start + q, start + q + 1});
    for (int q = 1; q + 1 < block; q += 2) odd.push_back({start + q, start + q + 1});
  }
  std::vector<std::vector<EntanglingPair>> layers{even};
  if (!odd.empty()) layers.push_back(odd);
  return Topology(n, std::move(layers), Boundary::open, "blocks-" + std::to_string(block));
}

Topology Topology::from_id(int n, std::string_view id) {
  if (id == "brickwork-open" || id == "brickwork") return brickwork(n, Boundary::open);
  if (id == "brickwork-periodic") return brickwork(n, Boundary::periodic);
  if (id.starts_with("blocks-")) return blocks(n, std::stoi(std::string(id.substr(7))));
  throw std::invalid_argument("unknown topology id: " + std::string(id));
}

const std::vector<EntanglingPair>& Topology::pattern(int index) const {
  if (index < 0 || index >= num_patterns()) throw std::out_of_range("Topology::pattern");
  return sublayers_[static_cast<std::size_t>(index)];
}

int Topology::pattern_index_for_layer(int layer) const {
  if (layer < 1) throw std::out_of_range("Topology: entangling layers start at 1");
  if (sublayers_.empty()) throw std::invalid_argument("Topology has no entangling patterns");
  return (layer - 1) % num_patterns();
}

bool Topology::is_wrap(const EntanglingPair& pair) const {
  if (boundary_ != Boundary::periodic || n_ <= 2) return false;
  return (pair.control == 0 && pair.target == n_ - 1) || (pair.control == n_ - 1 && pair.target == 0);
}

void Circuit::validate() const {
  if (depth < 0) throw std::invalid_argument("Circuit: negative depth");
  if (static_cast<int>(layers.size()) != depth + 1) throw std::invalid_argument("Circuit: expected depth+1 layers");
  if (static_cast<int>(entanglers.size()) != depth) throw std::invalid_argument("Circuit: expected depth entangling layers");
  for (const auto& layer : layers) {
    if (static_cast<int>(layer.size()) != n) throw std::invalid_argument("Circuit: layer needs one gate per qubit");
    for (const auto& g : layer)
      if (!is_unitary(g, 1e-10)) throw std::invalid_argument("Circuit: gate is not unitary");
  }
}

void Circuit::identify_cliffords() {
  clifford_index.assign(layers.size(), {});
  for (std::size_t j = 0; j < layers.size(); ++j)
    for (const auto& g : layers[j]) clifford_index[j].push_back(find_single_qubit_clifford(g));
}

Circuit sample_circuit(int n, int depth, Ensemble ensemble, const Topology& topology, Rng& rng) {
  if (depth < 0) throw std::invalid_argument("sample_circuit: negative depth");
  if (topology.num_qubits() != n) throw std::invalid_argument("sample_circuit: topology size mismatch");
  Circuit c;
  c.n = n;
  c.depth = depth;
  c.ensemble = ensemble;
  c.topology_id = topology.id();
  c.seed = rng.seed();
  const auto& table = single_qubit_cliffords();
  for (int j = 0; j <= depth; ++j) {
    std::vector<Eigen::Matrix2cd> layer;
    std::vector<int> indices;
    layer.reserve(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) {
      if (ensemble == Ensemble::clifford1q) {
        const auto idx = static_cast<int>(rng.below(table.size()));
        layer.push_back(table[static_cast<std::size_t>(idx)].matrix);
        indices.push_back(idx);
      } else {
        layer.push_back(haar_unitary_2x2(rng));
        indices.push_back(-1);
      }
    }
    c.layers.push_back(std::move(layer));
    c.clifford_index.push_back(std::move(indices));
    if (j >= 1) c.entanglers.push_back(topology.pattern(topology.pattern_index_for_layer(j)));
  }
  return c;
}

Circuit identity_circuit(int n, int depth, const Topology& topology) {
  Circuit c;
  c.n = n;
  c.depth = depth;
  c.topology_id = topology.id();
  const int id_index = find_single_qubit_clifford(Eigen::Matrix2cd::Identity());
  for (int j = 0; j <= depth; ++j) {
    c.layers.emplace_back(static_cast<std::size_t>(n), Eigen::Matrix2cd::Identity());
    c.clifford_index.emplace_back(static_cast<std::size_t>(n), id_index);
    if (j >= 1) c.entanglers.push_back(topology.pattern(topology.pattern_index_for_layer(j)));
  }
  return c;
}

void apply_circuit(DenseState& state, const Circuit& c) {
  if (state.num_qubits() != c.n) throw std::invalid_argument("apply_circuit: qubit count mismatch");
  for (int j = 0; j <= c.depth; ++j) {
    if (j >= 1)
      for (const auto& p : c.entanglers[static_cast<std::size_t>(j - 1)]) state.apply_cnot(p.control, p.target);
    for (int q = 0; q < c.n; ++q) state.apply_1q(c.layers[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)], q);
  }
}

void apply_circuit_adjoint(DenseState& state, const Circuit& c) {
  if (state.num_qubits() != c.n) throw std::invalid_argument("apply_circuit_adjoint: qubit count mismatch");
  for (int j = c.depth; j >= 0; --j) {
    for (int q = 0; q < c.n; ++q)
      state.apply_1q(c.layers[static_cast<std::size_t>(j)][static_cast<std::size_t>(q)].adjoint(), q);
    // CNOTs within a sub-layer act on disjoint qubits, so their order is irrelevant.
    if (j >= 1)
      for (const auto& p : c.entanglers[static_cast<std::size_t>(j - 1)]) state.apply_cnot(p.control, p.target);
  }
}

Eigen::MatrixXcd circuit_unitary(const Circuit& c) {
  if (c.n > 12) throw std::invalid_argument("circuit_unitary: n > 12 exceeds the dense size cap");
  const std::uint64_t dim = std::uint64_t{1} << c.n;
  Eigen::MatrixXcd u(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t col = 0; col < dim; ++col) {
    DenseState s = DenseState::basis(c.n, col);
    apply_circuit(s, c);
    u.col(static_cast<Eigen::Index>(col)) = s.amplitudes();
  }
  return u;
}

Eigen::MatrixXcd entangling_layer_unitary(const Topology& topology, int pattern_index) {
  const int n = topology.num_qubits();
  if (n > 12) throw std::invalid_argument("entangling_layer_unitary: n > 12");
  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::MatrixXcd u(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t col = 0; col < dim; ++col) {
    DenseState s = DenseState::basis(n, col);
    for (const auto& p : topology.pattern(pattern_index)) s.apply_cnot(p.control, p.target);
    u.col(static_cast<Eigen::Index>(col)) = s.amplitudes();
  }
  return u;
}

}  // namespace rss
