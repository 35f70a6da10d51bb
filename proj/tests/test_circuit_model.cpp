#include <doctest.h>

#include "rss/calibration.hpp"
#include "rss/circuit.hpp"
#include "rss/clifford.hpp"
#include "rss/mpo.hpp"
#include "rss/rng.hpp"
#include "support.hpp"

using namespace rss;

namespace {

Eigen::MatrixXcd dense_cnot(int n, int control, int target) {
  const std::uint64_t d = std::uint64_t{1} << n;
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::uint64_t x = 0; x < d; ++x) {
    const std::uint64_t y = (x & qubit_bit(n, control)) ? x ^ qubit_bit(n, target) : x;
    u(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = 1.0;
  }
  return u;
}

}  // namespace

TEST_SUITE("circuit_model") {

TEST_CASE("sampled circuit structure") {
  Rng rng(1);
  const Circuit c0 = sample_circuit(3, 0, Ensemble::clifford1q, Topology::brickwork(3), rng);
  CHECK(c0.layers.size() == 1);
  CHECK(c0.layers[0].size() == 3);
  CHECK(c0.entanglers.empty());
  for (int idx : c0.clifford_index[0]) CHECK((idx >= 0 && idx < 24));

  const Circuit c2 = sample_circuit(5, 2, Ensemble::haar, Topology::brickwork(5), rng);
  CHECK(c2.layers.size() == 3);
  CHECK(c2.entanglers.size() == 2);
  CHECK(c2.entanglers[0] == Topology::brickwork(5).pattern(0));
  CHECK(c2.entanglers[1] == Topology::brickwork(5).pattern(1));
  for (const auto& layer : c2.layers)
    for (const auto& g : layer) CHECK(is_unitary(g, 1e-12));
}

TEST_CASE("same seed gives the same circuit") {
  for (Ensemble e : {Ensemble::haar, Ensemble::clifford1q}) {
    Rng a(77), b(77);
    const Circuit x = sample_circuit(4, 3, e, Topology::brickwork(4), a);
    const Circuit y = sample_circuit(4, 3, e, Topology::brickwork(4), b);
    for (std::size_t j = 0; j < x.layers.size(); ++j)
      for (std::size_t q = 0; q < x.layers[j].size(); ++q) CHECK(x.layers[j][q] == y.layers[j][q]);
    CHECK(x.clifford_index == y.clifford_index);
  }
}

TEST_CASE("alternating brickwork patterns") {
  const Topology t = Topology::brickwork(6);
  CHECK(t.pattern(0) == std::vector<EntanglingPair>{{0, 1}, {2, 3}, {4, 5}});
  CHECK(t.pattern(1) == std::vector<EntanglingPair>{{1, 2}, {3, 4}});
  CHECK(t.pattern_index_for_layer(1) == 0);
  CHECK(t.pattern_index_for_layer(2) == 1);
  CHECK(t.pattern_index_for_layer(3) == 0);
  const Topology p = Topology::brickwork(6, Boundary::periodic);
  CHECK(p.pattern(1).back() == EntanglingPair{5, 0});
  CHECK(p.is_wrap(p.pattern(1).back()));
  CHECK_THROWS(Topology::brickwork(5, Boundary::periodic));
  CHECK_THROWS(Topology(3, {{{0, 1}, {1, 2}}}, Boundary::open, "bad"));
  CHECK_THROWS(Topology(3, {{{0, 3}}}, Boundary::open, "bad"));
  CHECK(Topology::from_id(8, "blocks-4").pattern(0) == std::vector<EntanglingPair>{{0, 1}, {2, 3}, {4, 5}, {6, 7}});
  CHECK(Topology::from_id(8, "blocks-4").pattern(1) == std::vector<EntanglingPair>{{1, 2}, {5, 6}});
}

TEST_CASE("circuit unitary examples") {
  const Circuit id0 = identity_circuit(3, 0, Topology::brickwork(3));
  CHECK(test::max_abs(Eigen::MatrixXcd(circuit_unitary(id0) - Eigen::MatrixXcd::Identity(8, 8))) < 1e-15);
  const Circuit id1 = identity_circuit(2, 1, Topology::brickwork(2));
  CHECK(test::max_abs(Eigen::MatrixXcd(circuit_unitary(id1) - dense_cnot(2, 0, 1))) < 1e-15);
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Circuit c = sample_circuit(4, 3, trial % 2 ? Ensemble::haar : Ensemble::clifford1q, Topology::brickwork(4), rng);
    const Eigen::MatrixXcd u = circuit_unitary(c);
    CHECK(test::max_abs(Eigen::MatrixXcd(u.adjoint() * u - Eigen::MatrixXcd::Identity(16, 16))) < 1e-10);
  }
}

TEST_CASE("circuit application agrees with its dense unitary") {
  Rng rng(10);
  const Circuit c = sample_circuit(4, 2, Ensemble::haar, Topology::brickwork(4), rng);
  const DenseState in = DenseState::haar_random(4, rng);
  DenseState s = in;
  apply_circuit(s, c);
  CHECK((s.amplitudes() - circuit_unitary(c) * in.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
  apply_circuit_adjoint(s, c);
  CHECK((s.amplitudes() - in.amplitudes()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single CNOT MPO") {
  const Mpo m = cnot_mpo(2, {0, 1}, false);
  CHECK(m.max_bond() == 2);
  CHECK(test::max_abs(Eigen::MatrixXcd(m.to_dense() - dense_cnot(2, 0, 1))) < 1e-15);
}

TEST_CASE("CNOT layer MPO equals the dense layer on all small topologies") {
  for (int n = 1; n <= 6; ++n) {
    std::vector<Topology> tops{Topology::brickwork(n)};
    if (n % 2 == 0) tops.push_back(Topology::brickwork(n, Boundary::periodic));
    for (const auto& t : tops)
      for (int p = 0; p < t.num_patterns(); ++p) {
        const Mpo m = cnot_layer_mpo(t, p);
        CHECK(m.max_bond() <= 2);
        CHECK(test::max_abs(Eigen::MatrixXcd(m.to_dense() - entangling_layer_unitary(t, p))) < 1e-12);
        CHECK(test::max_abs(Eigen::MatrixXcd(m.to_open().to_dense() - entangling_layer_unitary(t, p))) < 1e-12);
      }
  }
}

TEST_CASE("periodic n=4 layer is the product of its CNOTs") {
  const Topology t = Topology::brickwork(4, Boundary::periodic);
  const Eigen::MatrixXcd expect = dense_cnot(4, 3, 0) * dense_cnot(4, 1, 2);
  CHECK(test::max_abs(Eigen::MatrixXcd(cnot_layer_mpo(t, 1).to_dense() - expect)) < 1e-12);
}

TEST_CASE("empty layer MPO is the identity with bond 1") {
  const Topology t = Topology::brickwork(1);
  const Mpo m = cnot_layer_mpo(t, 0);
  CHECK(m.max_bond() == 1);
  CHECK(test::max_abs(Eigen::MatrixXcd(m.to_dense() - Eigen::MatrixXcd::Identity(2, 2))) < 1e-15);
}

TEST_CASE("single-qubit Clifford table is a group up to phase") {
  const auto& g = single_qubit_cliffords();
  REQUIRE(g.size() == 24);
  for (const auto& a : g)
    for (const auto& b : g) CHECK(find_single_qubit_clifford(a.matrix * b.matrix) >= 0);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(find_single_qubit_clifford(g[i].matrix) == static_cast<int>(i));
  CHECK(find_single_qubit_clifford(test::hadamard()) >= 0);
}

TEST_CASE("conjugation tables agree with matrices") {
  const std::array<const char*, 4> names{"I", "X", "Y", "Z"};
  for (const auto& c : single_qubit_cliffords())
    for (int p = 0; p < 4; ++p) {
      const Eigen::MatrixXcd lhs = c.matrix * PauliString::parse(names[static_cast<std::size_t>(p)]).matrix() * c.matrix.adjoint();
      const Eigen::MatrixXcd rhs =
          static_cast<double>(c.sign[static_cast<std::size_t>(p)]) *
          PauliString::parse(names[static_cast<std::size_t>(c.image[static_cast<std::size_t>(p)])]).matrix();
      CHECK(test::max_abs(Eigen::MatrixXcd(lhs - rhs)) < 1e-12);
    }
}

TEST_CASE("Haar single-qubit layer twirls to 1/3") {
  AcquisitionSpec spec;
  spec.header.n = 1;
  spec.header.depth = 0;
  spec.header.ensemble = Ensemble::haar;
  spec.header.master_seed = 31;
  spec.header.shots = 100000;
  spec.input = DenseState(1);
  const FrameSpectrum f = calibrate(spec);
  CHECK(f.value(0) == 1.0);
  CHECK(std::abs(f.value(1) - 1.0 / 3.0) < 3 * f.stderr_at(1));
}

}  // TEST_SUITE
