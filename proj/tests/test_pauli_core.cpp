#include <doctest.h>

#include "rss/pauli.hpp"
#include "rss/rng.hpp"
#include "rss/state.hpp"
#include "support.hpp"

using namespace rss;

TEST_SUITE("pauli_core") {

TEST_CASE("irrep labels mark the support") {
  CHECK(irrep_label(PauliString::parse("III")).str() == "000");
  CHECK(irrep_label(PauliString::parse("XIZ")).str() == "101");
  CHECK(irrep_label(PauliString::parse("ZYX")).str() == "111");
  // Same support pattern, different letters.
  CHECK(irrep_label(PauliString::parse("XIY")) == irrep_label(PauliString::parse("ZIZ")));
}

TEST_CASE("pauli weight counts ones") {
  CHECK(pauli_weight(parse_bitstring("0000")) == 0);
  CHECK(pauli_weight(parse_bitstring("101")) == 2);
  for (int n = 1; n <= 10; ++n) CHECK(pauli_weight((std::uint64_t{1} << n) - 1) == n);
  for (std::uint64_t i = 0; i < 256; ++i) {
    const PauliString p = PauliString::from_index(4, i);
    CHECK(irrep_label(p).weight() == pauli_weight(irrep_label(p).bits));
  }
}

TEST_CASE("qubit 0 is the most significant bit") {
  CHECK(qubit_bit(3, 0) == 4u);
  CHECK(bitstring(4, 3) == "100");
  CHECK(parse_bitstring("100") == 4u);
  const DenseState s = DenseState::basis(3, parse_bitstring("100"));
  CHECK(pauli_expectation(s, PauliString::parse("ZII")) == doctest::Approx(-1.0));
  CHECK(pauli_expectation(s, PauliString::parse("IIZ")) == doctest::Approx(1.0));
}

TEST_CASE("walsh hadamard examples") {
  Eigen::VectorXd a(2), b(2), c(4);
  a << 1, 0;
  b << 0.5, 0.5;
  c << 0.25, 0.25, 0.25, 0.25;
  CHECK(test::max_abs(Eigen::MatrixXd(walsh_hadamard(a) - Eigen::Vector2d(1, 1))) < 1e-15);
  CHECK(test::max_abs(Eigen::MatrixXd(walsh_hadamard(b) - Eigen::Vector2d(1, 0))) < 1e-15);
  CHECK(test::max_abs(Eigen::MatrixXd(walsh_hadamard(c) - Eigen::Vector4d(1, 0, 0, 0))) < 1e-15);
}

TEST_CASE("walsh hadamard is an involution up to 2^n") {
  Rng rng(3);
  for (int n = 1; n <= 10; ++n) {
    Eigen::VectorXd v(1 << n);
    for (auto& x : v) x = rng.normal();
    const Eigen::VectorXd w = walsh_hadamard(walsh_hadamard(v));
    CHECK((w - v * static_cast<double>(1 << n)).cwiseAbs().maxCoeff() < 1e-12 * (1 << n));
  }
}

TEST_CASE("transform of probabilities gives Z-type expectations") {
  Rng rng(5);
  for (int n = 1; n <= 6; ++n) {
    const DenseState s = DenseState::haar_random(n, rng);
    const Eigen::VectorXd phi = walsh_hadamard(s.probabilities());
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) {
      PauliString z(n);
      for (int q = 0; q < n; ++q)
        if (k & qubit_bit(n, q)) z.set(q, Pauli::Z);
      CHECK(std::abs(phi[static_cast<Eigen::Index>(k)] - pauli_expectation(s, z)) < 1e-12);
    }
  }
}

TEST_CASE("pauli expectation examples") {
  Eigen::Vector2cd plus(1, 1);
  const DenseState p = DenseState::from_amplitudes(plus);
  CHECK(pauli_expectation(DenseState(1), PauliString::parse("Z")) == doctest::Approx(1.0));
  CHECK(std::abs(pauli_expectation(p, PauliString::parse("Z"))) < 1e-15);
  CHECK(pauli_expectation(p, PauliString::parse("X")) == doctest::Approx(1.0));
}

TEST_CASE("frobenius-normalized strings are orthonormal") {
  for (int n = 1; n <= 3; ++n) {
    const std::uint64_t count = std::uint64_t{1} << (2 * n);
    std::vector<Eigen::MatrixXcd> m;
    for (std::uint64_t i = 0; i < count; ++i) m.push_back(PauliString::from_index(n, i, PauliNorm::frobenius).matrix());
    double worst = 0;
    for (std::uint64_t a = 0; a < count; ++a)
      for (std::uint64_t b = 0; b < count; ++b) {
        const Complex ip = (m[a].adjoint() * m[b]).trace();
        worst = std::max(worst, std::abs(ip - Complex(a == b ? 1.0 : 0.0, 0.0)));
      }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("unit-norm strings square to the identity") {
  for (std::uint64_t i = 0; i < 64; ++i) {
    const Eigen::MatrixXcd m = PauliString::from_index(3, i).matrix();
    CHECK(test::max_abs(Eigen::MatrixXcd(m * m - Eigen::MatrixXcd::Identity(8, 8))) < 1e-12);
  }
}

TEST_CASE("text round trip and index") {
  const PauliString p = PauliString::parse("XYZI");
  CHECK(p.str() == "XYZI");
  CHECK(PauliString::from_index(4, p.index()) == p);
  CHECK_THROWS(PauliString::parse("XQ"));
}

TEST_CASE("phase rule matches the dense matrix") {
  for (std::uint64_t i = 0; i < 64; ++i) {
    const PauliString p = PauliString::from_index(3, i);
    const Eigen::MatrixXcd m = p.matrix();
    for (std::uint64_t x = 0; x < 8; ++x) {
      const std::uint64_t y = x ^ p.x_mask();
      CHECK(std::abs(m(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) - pauli_phase(p, x)) < 1e-12);
    }
  }
}

}  // TEST_SUITE
