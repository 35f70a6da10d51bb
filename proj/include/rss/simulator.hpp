#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rss/circuit.hpp"
#include "rss/noise.hpp"
#include "rss/state.hpp"

namespace rss {

/// One acquisition outcome: the noise-free circuit description and the
/// observed bitstring. Noise realizations are never stored.
struct ShadowRecord {
  Circuit circuit;
  std::uint64_t z = 0;
  std::uint64_t shot_seed = 0;
};

struct RecordHeader {
  int n = 0;
  int depth = 0;
  Ensemble ensemble = Ensemble::clifford1q;
  std::string topology_id = "brickwork-open";
  /// "zero", "haar:<seed>", "stabilizer:<seed>", "basis:<bits>" or a name
  /// for explicitly supplied amplitudes.
  std::string input_state = "zero";
  std::string noise_digest;
  std::uint64_t master_seed = 0;
  std::uint64_t shots = 0;
};

struct RecordSet {
  RecordHeader header;
  std::vector<ShadowRecord> records;
  std::size_t size() const { return records.size(); }
};

/// Two-qubit unitary errors of one circuit execution, one per CNOT, indexed
/// like Circuit::entanglers.
using UnitaryEvents = std::vector<std::vector<Eigen::Matrix4cd>>;

/// Draws the GUE unitaries of one execution (empty lists without GUE noise).
UnitaryEvents sample_unitary_events(const Circuit& c, const NoiseModel& noise, Rng& rng);

/// Prepare, run the noisy circuit with sampled noise events, measure and
/// apply readout flips. Deterministic given the rng state.
ShadowRecord run_shot(const DenseState& input, const Circuit& c, const NoiseModel& noise, Rng& rng);

/// Exact Born probabilities of the noisy circuit, readout confusion included.
/// GUE errors are taken from `events` (required if the model has GUE noise);
/// Pauli channels are applied exactly on a density matrix (n <= 8), otherwise
/// a state vector is used (n <= 12).
Eigen::VectorXd outcome_distribution(const DenseState& input, const Circuit& c, const NoiseModel& noise,
                                     const UnitaryEvents* events = nullptr);

/// Same map applied to an arbitrary operator X in place of the input state:
/// returns Tr(E_z N(X)) for every outcome z, real part (n <= 8).
Eigen::VectorXd outcome_functional(const Eigen::MatrixXcd& input_operator, const Circuit& c, const NoiseModel& noise,
                                   const UnitaryEvents* events = nullptr);

/// Everything needed to regenerate shot i of an acquisition.
struct AcquisitionSpec {
  RecordHeader header;
  DenseState input;
  NoiseModel noise;
};

std::string noise_digest(const NoiseModel& noise);

/// Seed of the circuit drawn for shot `index`.
std::uint64_t circuit_seed(std::uint64_t master, std::uint64_t index);
/// Seed of the rng driving noise, measurement and readout of shot `index`.
std::uint64_t shot_seed(std::uint64_t master, std::uint64_t index);

Circuit circuit_for_shot(const RecordHeader& header, const Topology& topology, std::uint64_t index);
ShadowRecord simulate_shot(const AcquisitionSpec& spec, const Topology& topology, std::uint64_t index);

/// Streams records [first, first + count) in shot order to `sink` in chunks.
/// Output is independent of `threads`.
void acquire_stream(const AcquisitionSpec& spec, std::uint64_t first, std::uint64_t count, int threads,
                    const std::function<void(std::span<const ShadowRecord>)>& sink);

RecordSet acquire(const AcquisitionSpec& spec, int threads = 0);

/// Input state named by a header tag. `amplitudes:*` tags cannot be rebuilt
/// and throw.
DenseState make_input_state(const std::string& tag, int n);

/// Random stabilizer state: random single-qubit Cliffords and CNOT brickwork
/// layers of depth `layers` on |0^n>. Approximately uniform only.
DenseState random_stabilizer_state(int n, int layers, Rng& rng);

}  // namespace rss
