#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rss/clifford.hpp"
#include "rss/rng.hpp"
#include "rss/serialization.hpp"
#include "rss/simulator.hpp"
#include "support.hpp"

using namespace rss;

namespace {

NoiseModel pauli_readout_noise() {
  NoiseModel m;
  m.two_qubit = TwoQubitNoise::pauli;
  m.two_qubit_channel = PauliChannel::depolarizing(2, 0.15);
  m.single_qubit_channels = {PauliChannel::depolarizing(1, 0.05), PauliChannel::depolarizing(1, 0.2)};
  m.single_qubit_channels[1].probs = {0.8, 0.15, 0.0, 0.05};
  m.readout = {Readout{0.02, 0.07}};
  return m;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Per-entry check of shot frequencies against probabilities within z binomial sigmas.
void check_frequencies(const Eigen::VectorXd& p, const std::vector<int>& counts, int shots, double z) {
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    const double f = static_cast<double>(counts[static_cast<std::size_t>(x)]) / shots;
    const double sigma = std::sqrt(std::max(p[x] * (1 - p[x]), 1e-12) / shots);
    CHECK(std::abs(f - p[x]) <= z * sigma + 1e-12);
  }
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("identity circuit on |0> always reads zero") {
  const Circuit c = identity_circuit(4, 2, Topology::brickwork(4));
  Rng rng(1);
  for (int i = 0; i < 200; ++i) CHECK(run_shot(DenseState(4), c, NoiseModel::noiseless(), rng).z == 0u);
  const Eigen::VectorXd p = outcome_distribution(DenseState(4), c, NoiseModel::noiseless());
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p.sum() == doctest::Approx(1.0));
}

TEST_CASE("Hadamard gives fair coin flips") {
  Circuit c = identity_circuit(1, 0, Topology::brickwork(1));
  c.layers[0][0] = test::hadamard();
  c.identify_cliffords();
  Rng rng(2);
  const int shots = 10000;
  int ones = 0;
  for (int i = 0; i < shots; ++i) ones += static_cast<int>(run_shot(DenseState(1), c, NoiseModel::noiseless(), rng).z);
  CHECK(std::abs(ones / double(shots) - 0.5) < 3 * std::sqrt(0.25 / shots));
}

TEST_CASE("same seed, same record") {
  Rng crng(3);
  const Circuit c = sample_circuit(3, 2, Ensemble::haar, Topology::brickwork(3), crng);
  const NoiseModel m = pauli_readout_noise();
  for (int i = 0; i < 20; ++i) {
    Rng a(100 + i), b(100 + i);
    CHECK(run_shot(DenseState(3), c, m, a).z == run_shot(DenseState(3), c, m, b).z);
  }
}

TEST_CASE("outcome distributions are normalized") {
  Rng rng(4);
  NoiseModel g;
  g.two_qubit = TwoQubitNoise::gue;
  g.gamma = 1.0;
  for (int i = 0; i < 20; ++i) {
    const Circuit c = sample_circuit(4, 2, Ensemble::haar, Topology::brickwork(4), rng);
    const UnitaryEvents ev = sample_unitary_events(c, g, rng);
    CHECK(outcome_distribution(DenseState(4), c, pauli_readout_noise()).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(outcome_distribution(DenseState(4), c, g, &ev).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("shot frequencies match the exact distribution under Pauli and readout noise") {
  Rng crng(5);
  for (int d = 0; d <= 2; ++d) {
    const Circuit c = sample_circuit(3, d, Ensemble::clifford1q, Topology::brickwork(3), crng);
    NoiseModel m = pauli_readout_noise();
    m.first_layer_ideal = d % 2 == 0;
    const Eigen::VectorXd p = outcome_distribution(DenseState(3), c, m);
    const int shots = 100000;
    std::vector<int> counts(8);
    Rng rng(50 + d);
    for (int i = 0; i < shots; ++i) ++counts[run_shot(DenseState(3), c, m, rng).z];
    check_frequencies(p, counts, shots, 4.0);
  }
}

TEST_CASE("shot frequencies match the event-averaged distribution under GUE noise") {
  Rng crng(6);
  const Circuit c = sample_circuit(3, 2, Ensemble::haar, Topology::brickwork(3), crng);
  NoiseModel g;
  g.two_qubit = TwoQubitNoise::gue;
  g.gamma = 2.0;
  Eigen::VectorXd p = Eigen::VectorXd::Zero(8);
  Rng erng(7);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const UnitaryEvents ev = sample_unitary_events(c, g, erng);
    p += outcome_distribution(DenseState(3), c, g, &ev);
  }
  p /= draws;
  const int shots = 50000;
  std::vector<int> counts(8);
  Rng rng(8);
  for (int i = 0; i < shots; ++i) ++counts[run_shot(DenseState(3), c, g, rng).z];
  // Event averaging adds its own (smaller) error; 5 sigma of the shot error covers both.
  check_frequencies(p, counts, shots, 5.0);
}

TEST_CASE("unitary events preserve the norm") {
  Rng rng(9);
  DenseState s = DenseState::haar_random(4, rng);
  const std::array<int, 2> sites{1, 3};
  for (int i = 0; i < 100; ++i) {
    apply_unitary_event(s, sites, incoherent_noise_unitary(1.5, rng));
    CHECK(std::abs(s.norm2() - 1.0) < 1e-12);
  }
}

TEST_CASE("acquisition is determined by seed and index") {
  AcquisitionSpec spec;
  spec.header.n = 4;
  spec.header.depth = 2;
  spec.header.master_seed = 11;
  spec.header.shots = 3000;
  spec.input = DenseState(4);
  spec.noise = pauli_readout_noise();
  const RecordSet a = acquire(spec, 1);
  const RecordSet b = acquire(spec, 4);
  REQUIRE(a.size() == 3000);
  const Topology topo = Topology::brickwork(4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].z == b.records[i].z);
    CHECK(a.records[i].shot_seed == b.records[i].shot_seed);
  }
  const ShadowRecord r = simulate_shot(spec, topo, 1234);
  CHECK(r.z == a.records[1234].z);
  CHECK(r.circuit.clifford_index == a.records[1234].circuit.clifford_index);
}

TEST_CASE("empty acquisition and file digests") {
  const auto dir = std::filesystem::temp_directory_path() / "rss_sim_test";
  std::filesystem::create_directories(dir);
  AcquisitionSpec spec;
  spec.header.n = 3;
  spec.header.depth = 1;
  spec.header.master_seed = 12;
  spec.input = DenseState(3);
  spec.header.shots = 0;
  const RecordSet empty = acquire(spec);
  CHECK(empty.size() == 0);
  write_records((dir / "empty.jsonl").string(), empty);
  const RecordSet back = read_records((dir / "empty.jsonl").string());
  CHECK(back.size() == 0);
  CHECK(back.header.n == 3);

  spec.header.shots = 500;
  write_records((dir / "a.jsonl").string(), acquire(spec));
  write_records((dir / "b.jsonl").string(), acquire(spec));
  CHECK(digest(read_file((dir / "a.jsonl").string())) == digest(read_file((dir / "b.jsonl").string())));
  const RecordSet r = read_records((dir / "a.jsonl").string());
  REQUIRE(r.size() == 500);
  const RecordSet orig = acquire(spec);
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(r.records[i].z == orig.records[i].z);
    CHECK(test::max_abs(Eigen::MatrixXcd(circuit_unitary(r.records[i].circuit) - circuit_unitary(orig.records[i].circuit))) < 1e-15);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("input state tags") {
  CHECK(std::abs(make_input_state("zero", 3).amplitude(0) - Complex(1.0)) < 1e-15);
  CHECK(std::abs(make_input_state("basis:101", 3).amplitude(5) - Complex(1.0)) < 1e-15);
  const DenseState h1 = make_input_state("haar:5", 4);
  const DenseState h2 = make_input_state("haar:5", 4);
  CHECK(std::abs(h1.inner(h2) - Complex(1.0)) < 1e-12);
  CHECK_THROWS(make_input_state("amplitudes:psi", 3));
  // A stabilizer state has exactly 2^n Pauli strings with expectation +-1.
  const DenseState s = make_input_state("stabilizer:9", 3);
  int stabilizers = 0;
  for (std::uint64_t i = 0; i < 64; ++i)
    if (std::abs(std::abs(pauli_expectation(s, PauliString::from_index(3, i))) - 1.0) < 1e-9) ++stabilizers;
  CHECK(stabilizers == 8);
}

}  // TEST_SUITE
