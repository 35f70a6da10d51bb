#include <doctest.h>

#include <numeric>
#include <set>

#include "rss/noise.hpp"
#include "rss/rng.hpp"
#include "support.hpp"

using namespace rss;

namespace {

std::vector<Eigen::Vector4d> gue_spectra(int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::Vector4d> out;
  for (int i = 0; i < count; ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sample_gue(4, rng));
    out.push_back(eig.eigenvalues());
  }
  return out;
}

PauliChannel random_channel(int arity, Rng& rng) {
  PauliChannel c = PauliChannel::identity(arity);
  double total = 0;
  for (auto& p : c.probs) total += (p = rng.uniform());
  c.probs[0] += 3 * total;  // mostly identity
  total *= 4;
  for (auto& p : c.probs) p /= total;
  return c;
}

}  // namespace

TEST_SUITE("noise") {

TEST_CASE("GUE draws are Hermitian and centred") {
  Rng rng(1);
  Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(4, 4);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const Eigen::MatrixXcd h = sample_gue(4, rng);
    CHECK(test::max_abs(Eigen::MatrixXcd(h - h.adjoint())) == 0.0);
    mean += h;
  }
  mean /= draws;
  CHECK(test::max_abs(mean) < 5.0 / 100.0);
}

TEST_CASE("GUE second spectral moment at dim 256") {
  Rng rng(2);
  const int d = 256;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(sample_gue(d, rng));
  const double m2 = eig.eigenvalues().squaredNorm() / d;
  // Semicircle of radius 2 sqrt(d): second moment d.
  CHECK(std::abs(m2 / d - 1.0) < 0.05);
}

TEST_CASE("incoherent noise unitary") {
  Rng rng(3);
  CHECK(test::max_abs(Eigen::MatrixXcd(incoherent_noise_unitary(0.0, rng) - Eigen::Matrix4cd::Identity())) < 1e-15);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Matrix4cd u = incoherent_noise_unitary(2.0 * rng.uniform(), rng);
    CHECK(test::max_abs(Eigen::MatrixXcd(u.adjoint() * u - Eigen::Matrix4cd::Identity())) < 1e-12);
  }
}

TEST_CASE("infidelity formula") {
  CHECK(infidelity_of_unitary(Eigen::Matrix4cd::Identity()) == doctest::Approx(0.0));
  const Eigen::MatrixXcd zi = PauliString::parse("ZI").matrix();
  CHECK(infidelity_of_unitary(zi) == doctest::Approx(0.8));
}

TEST_CASE("mean infidelity grows with gamma") {
  const auto spectra = gue_spectra(1000, 4);
  double prev = -1;
  for (int i = 0; i <= 40; ++i) {
    const double r = mean_incoherent_infidelity(0.05 * i, spectra);
    CHECK(r > prev);
    prev = r;
  }
}

TEST_CASE("gamma calibration") {
  Rng rng(5);
  CHECK(calibrate_gamma(0.0, 1000, rng) == 0.0);
  Rng a(6), b(6);
  const double g3 = calibrate_gamma(1e-3, 20000, a);
  const double g2 = calibrate_gamma(1e-2, 20000, b);
  CHECK(g2 > g3);
  // Independent draws.
  const auto spectra = gue_spectra(20000, 99);
  const double r = mean_incoherent_infidelity(g3, spectra);
  CHECK(r >= 0.95e-3);
  CHECK(r <= 1.05e-3);
  Rng c(7);
  CHECK_THROWS(calibrate_gamma(0.9, 100, c));
}

TEST_CASE("identity Pauli channel leaves the state alone") {
  Rng rng(8);
  const DenseState in = DenseState::haar_random(2, rng);
  DenseState s = in;
  const std::array<int, 2> sites{0, 1};
  for (int i = 0; i < 100; ++i) {
    const int label = sample_pauli_label(PauliChannel::identity(2), rng);
    CHECK(label == 0);
    apply_pauli_label(s, sites, label);
  }
  CHECK(std::abs(std::abs(s.inner(in)) - 1.0) < 1e-12);
}

TEST_CASE("readout flip with p10 = 1") {
  NoiseModel m;
  m.readout = {Readout{1.0, 0.0}};
  Rng rng(9);
  for (int i = 0; i < 100; ++i) CHECK(apply_readout(0, 1, m, rng) == 1u);
  // p01 = 0: a one stays a one.
  for (int i = 0; i < 100; ++i) CHECK(apply_readout(1, 1, m, rng) == 1u);
}

TEST_CASE("readout confusion on a distribution") {
  NoiseModel m;
  m.readout = {Readout{0.1, 0.2}};
  std::vector<double> p{1.0, 0.0};
  apply_readout_confusion(p, 1, m);
  CHECK(p[0] == doctest::Approx(0.9));
  CHECK(p[1] == doctest::Approx(0.1));
  std::vector<double> q{0.0, 1.0};
  apply_readout_confusion(q, 1, m);
  CHECK(q[0] == doctest::Approx(0.2));
}

TEST_CASE("depolarizing decay of Z over trajectories") {
  const double p = 0.2;
  const PauliChannel ch = PauliChannel::depolarizing(2, p);
  const double lambda = ch.transfer_eigenvalues()[static_cast<std::size_t>(PauliString::parse("ZI").index())];
  CHECK(lambda == doctest::Approx(1.0 - 16.0 / 15.0 * p));
  Rng rng(10);
  const std::array<int, 2> sites{0, 1};
  const int shots = 100000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < shots; ++i) {
    DenseState s(2);
    apply_pauli_label(s, sites, sample_pauli_label(ch, rng));
    const double z = pauli_expectation(s, PauliString::parse("ZI"));
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / shots;
  const double se = std::sqrt((sum2 / shots - mean * mean) / shots);
  CHECK(std::abs(mean - lambda) < 3 * se);
}

TEST_CASE("trajectory average of a Pauli channel equals its transfer diagonal") {
  Rng rng(11);
  const PauliChannel ch = random_channel(2, rng);
  const auto lambda = ch.transfer_eigenvalues();
  const DenseState in = DenseState::haar_random(2, rng);
  const std::array<int, 2> sites{0, 1};
  const int shots = 100000;
  std::array<double, 16> sum{}, sum2{};
  for (int i = 0; i < shots; ++i) {
    DenseState s = in;
    apply_pauli_label(s, sites, sample_pauli_label(ch, rng));
    for (int a = 0; a < 16; ++a) {
      const double v = pauli_expectation(s, PauliString::from_index(2, static_cast<std::uint64_t>(a)));
      sum[static_cast<std::size_t>(a)] += v;
      sum2[static_cast<std::size_t>(a)] += v * v;
    }
  }
  for (int a = 0; a < 16; ++a) {
    const auto i = static_cast<std::size_t>(a);
    const double mean = sum[i] / shots;
    const double se = std::sqrt(std::max(0.0, sum2[i] / shots - mean * mean) / shots);
    const double expect = lambda[i] * pauli_expectation(in, PauliString::from_index(2, static_cast<std::uint64_t>(a)));
    CHECK(std::abs(mean - expect) <= 3 * se + 1e-12);
  }
}

TEST_CASE("average GUE error channel has a near-symmetric transfer matrix") {
  Rng rng(12);
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(16, 16);
  const int draws = 10000;
  std::vector<Eigen::MatrixXcd> p;
  for (int a = 0; a < 16; ++a) p.push_back(PauliString::from_index(2, static_cast<std::uint64_t>(a)).matrix());
  for (int i = 0; i < draws; ++i) {
    const Eigen::Matrix4cd u = incoherent_noise_unitary(1.0, rng);
    for (int a = 0; a < 16; ++a)
      for (int b = 0; b < 16; ++b) r(a, b) += (p[a] * u * p[b] * u.adjoint()).trace().real() / 4.0;
  }
  r /= draws;
  // Unital and trace preserving.
  CHECK(std::abs(r(0, 0) - 1.0) < 1e-12);
  for (int a = 1; a < 16; ++a) {
    CHECK(std::abs(r(0, a)) < 1e-12);
    CHECK(std::abs(r(a, 0)) < 1e-12);
  }
  CHECK(test::max_abs(Eigen::MatrixXd(r - r.transpose())) < 0.05);
}

TEST_CASE("model validation") {
  NoiseModel m;
  m.two_qubit = TwoQubitNoise::pauli;
  m.two_qubit_channel = PauliChannel::identity(2);
  m.two_qubit_channel.probs[0] = 0.5;
  CHECK_THROWS(m.validate(2));
  NoiseModel g;
  g.two_qubit = TwoQubitNoise::gue;
  g.gamma = 9;
  CHECK_THROWS(g.validate(2));
  NoiseModel ro;
  ro.readout = {Readout{}, Readout{}};
  CHECK_THROWS(ro.validate(3));
  CHECK_NOTHROW(ro.validate(2));
  CHECK(NoiseModel::noiseless().is_noiseless());
}

TEST_CASE("gate-dependent channel assignment is fixed") {
  NoiseModel m;
  for (int i = 0; i < 3; ++i) m.single_qubit_channels.push_back(PauliChannel::depolarizing(1, 0.01 * (i + 1)));
  for (int idx = 0; idx < 24; ++idx) CHECK(m.channel_for_gate(idx) == m.channel_for_gate(idx));
  CHECK(m.channel_for_gate(-1) == &m.single_qubit_channels.front());
  std::set<const PauliChannel*> used;
  for (int idx = 0; idx < 24; ++idx) used.insert(m.channel_for_gate(idx));
  CHECK(used.size() > 1);
  CHECK(NoiseModel{}.channel_for_gate(3) == nullptr);
}

}  // TEST_SUITE
