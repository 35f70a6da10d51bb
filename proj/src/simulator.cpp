#include "rss/simulator.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "rss/clifford.hpp"
#include "rss/parallel.hpp"
#include "rss/rng.hpp"
#include "rss/serialization.hpp"

namespace rss {
namespace {

constexpr std::uint64_t kChunk = 1024;

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

void check_events(const Circuit& c, const NoiseModel& noise, const UnitaryEvents* events) {
  if (noise.two_qubit != TwoQubitNoise::gue || noise.gamma == 0.0) return;
  if (events == nullptr) throw std::invalid_argument("outcome_distribution: GUE noise needs its unitary events");
  if (events->size() != c.entanglers.size()) throw std::invalid_argument("outcome_distribution: event layers mismatch");
  for (std::size_t j = 0; j < events->size(); ++j)
    if ((*events)[j].size() != c.entanglers[j].size())
      throw std::invalid_argument("outcome_distribution: event count mismatch");
}

bool uses_gue(const NoiseModel& noise) { return noise.two_qubit == TwoQubitNoise::gue && noise.gamma > 0; }

// Operations on a density-like matrix rho -> U rho U^dagger, built from the
// state-vector kernels applied column-wise.
class DensityMatrix {
 public:
  DensityMatrix(Eigen::MatrixXcd m, int n) : m_(std::move(m)), n_(n) {}

  template <class Kernel>
  void conjugate(Kernel&& k) {
    apply_columns(k);
    m_.adjointInPlace();
    apply_columns(k);
    m_.adjointInPlace();
  }

  void pauli_channel(const PauliChannel& ch, std::span<const int> sites) {
    if (ch.is_identity()) return;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(m_.rows(), m_.cols());
    for (std::size_t label = 0; label < ch.probs.size(); ++label) {
      if (ch.probs[label] == 0) continue;
      DensityMatrix branch(m_, n_);
      const PauliString p = pauli_label_string(n_, sites, static_cast<int>(label));
      branch.conjugate([&](std::span<Complex> v) { kernels::apply_pauli(v, p); });
      acc += ch.probs[label] * branch.m_;
    }
    m_ = std::move(acc);
  }

  Eigen::VectorXd diagonal_real() const { return m_.diagonal().real(); }

 private:
  template <class Kernel>
  void apply_columns(Kernel& k) {
    for (Eigen::Index c = 0; c < m_.cols(); ++c) k(std::span<Complex>(m_.col(c).data(), static_cast<std::size_t>(m_.rows())));
  }

  Eigen::MatrixXcd m_;
  int n_;
};

// Runs the noisy circuit on either a state vector (pure) or a density matrix.
// Pauli channels go through `pauli` which differs between the two paths.
template <class Unitary1, class Unitary2, class Cnot, class PauliHook>
void walk_circuit(const Circuit& c, const NoiseModel& noise, const UnitaryEvents* events, Unitary1&& u1, Unitary2&& u2,
                  Cnot&& cnot, PauliHook&& pauli) {
  auto single_layer = [&](int j, bool noisy) {
    for (int q = 0; q < c.n; ++q) {
      u1(c.layers[sz(j)][sz(q)], q);
      if (!noisy) continue;
      if (const PauliChannel* ch = noise.channel_for_gate(c.clifford_index[sz(j)][sz(q)])) {
        const std::array<int, 1> site{q};
        pauli(*ch, std::span<const int>(site));
      }
    }
  };
  single_layer(0, !noise.first_layer_ideal);
  for (int j = 1; j <= c.depth; ++j) {
    const auto& pairs = c.entanglers[sz(j - 1)];
    for (std::size_t g = 0; g < pairs.size(); ++g) {
      cnot(pairs[g].control, pairs[g].target);
      const std::array<int, 2> sites{pairs[g].control, pairs[g].target};
      if (uses_gue(noise)) {
        u2((*events)[sz(j - 1)][g], sites[0], sites[1]);
      } else if (noise.two_qubit == TwoQubitNoise::pauli) {
        pauli(noise.two_qubit_channel, std::span<const int>(sites));
      }
    }
    single_layer(j, true);
  }
}

std::uint64_t sample_index(const Eigen::VectorXd& probs, double u) {
  double acc = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<std::uint64_t>(i);
  }
  for (Eigen::Index i = probs.size(); i-- > 0;)
    if (probs[i] > 0) return static_cast<std::uint64_t>(i);
  return 0;
}

Eigen::VectorXd density_path(Eigen::MatrixXcd rho, const Circuit& c, const NoiseModel& noise, const UnitaryEvents* events) {
  const int n = c.n;
  DensityMatrix dm(std::move(rho), n);
  walk_circuit(
      c, noise, events,
      [&](const Eigen::Matrix2cd& u, int q) { dm.conjugate([&](std::span<Complex> v) { kernels::apply_1q(v, n, u, q); }); },
      [&](const Eigen::Matrix4cd& u, int a, int b) {
        dm.conjugate([&](std::span<Complex> v) { kernels::apply_2q(v, n, u, a, b); });
      },
      [&](int a, int b) { dm.conjugate([&](std::span<Complex> v) { kernels::apply_cnot(v, n, a, b); }); },
      [&](const PauliChannel& ch, std::span<const int> sites) { dm.pauli_channel(ch, sites); });
  Eigen::VectorXd p = dm.diagonal_real();
  apply_readout_confusion(std::span<double>(p.data(), static_cast<std::size_t>(p.size())), n, noise);
  return p;
}

}  // namespace

UnitaryEvents sample_unitary_events(const Circuit& c, const NoiseModel& noise, Rng& rng) {
  UnitaryEvents ev(c.entanglers.size());
  if (!uses_gue(noise)) return ev;
  for (std::size_t j = 0; j < c.entanglers.size(); ++j)
    for (std::size_t g = 0; g < c.entanglers[j].size(); ++g) ev[j].push_back(incoherent_noise_unitary(noise.gamma, rng));
  return ev;
}

ShadowRecord run_shot(const DenseState& input, const Circuit& c, const NoiseModel& noise, Rng& rng) {
  if (input.num_qubits() != c.n) throw std::invalid_argument("run_shot: input state has the wrong qubit count");
  ShadowRecord rec;
  rec.shot_seed = rng.seed();
  DenseState s = input;
  // GUE errors are drawn inline, in gate order, from the shot stream.
  const bool gue = uses_gue(noise);
  auto single_layer = [&](int j, bool noisy) {
    for (int q = 0; q < c.n; ++q) {
      s.apply_1q(c.layers[sz(j)][sz(q)], q);
      if (!noisy) continue;
      if (const PauliChannel* ch = noise.channel_for_gate(c.clifford_index[sz(j)][sz(q)])) {
        const std::array<int, 1> site{q};
        apply_pauli_label(s, site, sample_pauli_label(*ch, rng));
      }
    }
  };
  single_layer(0, !noise.first_layer_ideal);
  for (int j = 1; j <= c.depth; ++j) {
    for (const auto& p : c.entanglers[sz(j - 1)]) {
      s.apply_cnot(p.control, p.target);
      const std::array<int, 2> sites{p.control, p.target};
      if (gue) {
        s.apply_2q(incoherent_noise_unitary(noise.gamma, rng), p.control, p.target);
      } else if (noise.two_qubit == TwoQubitNoise::pauli) {
        apply_pauli_label(s, sites, sample_pauli_label(noise.two_qubit_channel, rng));
      }
    }
    single_layer(j, true);
  }
  const std::uint64_t ideal = sample_index(s.probabilities(), rng.uniform());
  rec.z = apply_readout(ideal, c.n, noise, rng);
  rec.circuit = c;
  return rec;
}

Eigen::VectorXd outcome_distribution(const DenseState& input, const Circuit& c, const NoiseModel& noise,
                                     const UnitaryEvents* events) {
  if (input.num_qubits() != c.n) throw std::invalid_argument("outcome_distribution: qubit count mismatch");
  if (c.n > 12) throw std::invalid_argument("outcome_distribution: n > 12 exceeds the size cap");
  check_events(c, noise, events);
  if (noise.has_pauli_channels()) {
    if (c.n > 8) throw std::invalid_argument("outcome_distribution: exact Pauli channels need n <= 8");
    const Eigen::VectorXcd& a = input.amplitudes();
    return density_path(a * a.adjoint(), c, noise, events);
  }
  DenseState s = input;
  walk_circuit(
      c, noise, events, [&](const Eigen::Matrix2cd& u, int q) { s.apply_1q(u, q); },
      [&](const Eigen::Matrix4cd& u, int a, int b) { s.apply_2q(u, a, b); }, [&](int a, int b) { s.apply_cnot(a, b); },
      [](const PauliChannel&, std::span<const int>) {});
  Eigen::VectorXd p = s.probabilities();
  apply_readout_confusion(std::span<double>(p.data(), static_cast<std::size_t>(p.size())), c.n, noise);
  return p;
}

Eigen::VectorXd outcome_functional(const Eigen::MatrixXcd& input_operator, const Circuit& c, const NoiseModel& noise,
                                   const UnitaryEvents* events) {
  const Eigen::Index dim = Eigen::Index{1} << c.n;
  if (c.n > 8) throw std::invalid_argument("outcome_functional: n > 8 exceeds the size cap");
  if (input_operator.rows() != dim || input_operator.cols() != dim)
    throw std::invalid_argument("outcome_functional: operator has the wrong dimension");
  check_events(c, noise, events);
  return density_path(input_operator, c, noise, events);
}

std::string noise_digest(const NoiseModel& noise) { return hex64(fnv1a64(to_json(noise).dump())); }

std::uint64_t circuit_seed(std::uint64_t master, std::uint64_t index) { return derive_seed(master, index, "circuit"); }
std::uint64_t shot_seed(std::uint64_t master, std::uint64_t index) { return derive_seed(master, index, "shot"); }

Circuit circuit_for_shot(const RecordHeader& header, const Topology& topology, std::uint64_t index) {
  Rng rng(circuit_seed(header.master_seed, index));
  return sample_circuit(header.n, header.depth, header.ensemble, topology, rng);
}

ShadowRecord simulate_shot(const AcquisitionSpec& spec, const Topology& topology, std::uint64_t index) {
  const Circuit c = circuit_for_shot(spec.header, topology, index);
  Rng rng(shot_seed(spec.header.master_seed, index));
  return run_shot(spec.input, c, spec.noise, rng);
}

void acquire_stream(const AcquisitionSpec& spec, std::uint64_t first, std::uint64_t count, int threads,
                    const std::function<void(std::span<const ShadowRecord>)>& sink) {
  const RecordHeader& h = spec.header;
  if (spec.input.num_qubits() != h.n) throw std::invalid_argument("acquire: input state has the wrong qubit count");
  spec.noise.validate(h.n);
  const Topology topology = Topology::from_id(h.n, h.topology_id);
  const std::uint64_t chunks = (count + kChunk - 1) / kChunk;
  // Chunks are simulated in waves of a few per worker and handed to the sink in order.
  const std::uint64_t wave = static_cast<std::uint64_t>(std::max(1, threads <= 0 ? default_threads() : threads)) * 2;
  for (std::uint64_t w0 = 0; w0 < chunks; w0 += wave) {
    const std::uint64_t w1 = std::min(chunks, w0 + wave);
    std::vector<std::vector<ShadowRecord>> out(static_cast<std::size_t>(w1 - w0));
    parallel_chunks(static_cast<std::size_t>(w1 - w0), threads, [&](std::size_t c) {
      const std::uint64_t begin = first + (w0 + c) * kChunk;
      const std::uint64_t end = std::min(first + count, begin + kChunk);
      auto& recs = out[c];
      recs.reserve(static_cast<std::size_t>(end - begin));
      for (std::uint64_t i = begin; i < end; ++i) recs.push_back(simulate_shot(spec, topology, i));
    });
    for (const auto& recs : out) sink(recs);
  }
}

RecordSet acquire(const AcquisitionSpec& spec, int threads) {
  RecordSet set;
  set.header = spec.header;
  set.header.noise_digest = noise_digest(spec.noise);
  set.records.reserve(static_cast<std::size_t>(spec.header.shots));
  acquire_stream(spec, 0, spec.header.shots, threads,
                 [&](std::span<const ShadowRecord> recs) { set.records.insert(set.records.end(), recs.begin(), recs.end()); });
  return set;
}

DenseState random_stabilizer_state(int n, int layers, Rng& rng) {
  const Topology topo = Topology::brickwork(n);
  const Circuit c = sample_circuit(n, layers, Ensemble::clifford1q, topo, rng);
  DenseState s(n);
  apply_circuit(s, c);
  return s;
}

DenseState make_input_state(const std::string& tag, int n) {
  auto suffix = [&](std::string_view prefix) -> std::string {
    return tag.size() > prefix.size() && tag.compare(0, prefix.size(), prefix) == 0 ? tag.substr(prefix.size()) : std::string();
  };
  if (tag == "zero") return DenseState(n);
  if (auto s = suffix("haar:"); !s.empty()) {
    Rng rng(std::stoull(s));
    return DenseState::haar_random(n, rng);
  }
  if (auto s = suffix("stabilizer:"); !s.empty()) {
    Rng rng(std::stoull(s));
    return random_stabilizer_state(n, 2 * n, rng);
  }
  if (auto s = suffix("basis:"); !s.empty()) {
    if (static_cast<int>(s.size()) != n) throw std::invalid_argument("make_input_state: basis label has the wrong length");
    return DenseState::basis(n, parse_bitstring(s));
  }
  throw std::invalid_argument("make_input_state: cannot rebuild input state '" + tag + "'");
}

}  // namespace rss
