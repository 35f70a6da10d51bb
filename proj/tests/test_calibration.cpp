#include <doctest.h>

#include "rss/calibration.hpp"
#include "rss/frame_oracles.hpp"
#include "rss/rng.hpp"
#include "support.hpp"

using namespace rss;

namespace {

Eigen::VectorXd local_ideal(int n, double per_site) {
  Eigen::VectorXd f(Eigen::Index{1} << n);
  for (Eigen::Index k = 0; k < f.size(); ++k) f[k] = std::pow(per_site, pauli_weight(static_cast<std::uint64_t>(k)));
  return f;
}

NoiseModel local_pauli_noise() {
  NoiseModel m;
  m.two_qubit = TwoQubitNoise::pauli;
  m.two_qubit_channel = PauliChannel::depolarizing(2, 0.05);
  m.single_qubit_channels = {PauliChannel::depolarizing(1, 0.02), PauliChannel::depolarizing(1, 0.06)};
  m.readout = {Readout{0.01, 0.03}};
  return m;
}

AcquisitionSpec zero_spec(int n, int depth, const NoiseModel& noise, std::uint64_t shots, std::uint64_t seed) {
  AcquisitionSpec s;
  s.header.n = n;
  s.header.depth = depth;
  s.header.master_seed = seed;
  s.header.shots = shots;
  s.header.noise_digest = noise_digest(noise);
  s.input = DenseState(n);
  s.noise = noise;
  return s;
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("phi for trivial circuits") {
  const Circuit id = identity_circuit(3, 0, Topology::brickwork(3));
  CHECK((phi_dense(id, 0) - Eigen::VectorXd::Ones(8)).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::VectorXd p = phi_dense(identity_circuit(1, 0, Topology::brickwork(1)), 1);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(-1.0));
}

TEST_CASE("phi via the transform equals direct Pauli expectations") {
  Rng rng(1);
  for (int n = 1; n <= 5; ++n)
    for (int d = 0; d <= 2; ++d) {
      const Circuit c = sample_circuit(n, d, d == 1 ? Ensemble::haar : Ensemble::clifford1q, Topology::brickwork(n), rng);
      const std::uint64_t z = rng.next_u64() & ((std::uint64_t{1} << n) - 1);
      CHECK((phi_dense(c, z) - phi_direct(c, z)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("phi tensor train has bounded ranks and matches dense") {
  Rng rng(2);
  for (int d = 0; d <= 2; ++d) {
    const Circuit c = sample_circuit(6, d, Ensemble::haar, Topology::brickwork(6), rng);
    const TensorTrain t = phi_tt(c, 0b101101);
    CHECK(t.max_rank() <= static_cast<int>(std::pow(4, d)));
    CHECK((t.to_dense() - phi_dense(c, 0b101101)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("empirical frame at D=0, n=1") {
  const FrameSpectrum f = calibrate(zero_spec(1, 0, NoiseModel::noiseless(), 20000, 3));
  CHECK(f.value(0) == 1.0);
  CHECK(f.stderr_at(0) == 0.0);
  CHECK(std::abs(f.value(1) - 1.0 / 3.0) < 3 * f.stderr_at(1));
  CHECK(f.samples == 20000);
}

TEST_CASE("calibration is independent of the thread count") {
  CalibrationOptions a, b;
  a.threads = 1;
  b.threads = 3;
  const AcquisitionSpec spec = zero_spec(4, 1, local_pauli_noise(), 3000, 4);
  const FrameSpectrum x = calibrate(spec, a);
  const FrameSpectrum y = calibrate(spec, b);
  CHECK((x.f - y.f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exact frame of enumerable local ensembles") {
  FrameEnsemble e;
  e.n = 1;
  CHECK(exact_f(e, NoiseModel::noiseless()).value(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  e.n = 2;
  const FrameSpectrum f2 = exact_f(e, NoiseModel::noiseless());
  CHECK((f2.values() - local_ideal(2, 1.0 / 3.0)).cwiseAbs().maxCoeff() < 1e-12);
  // Symmetric readout flips scale each site by 1 - 2p.
  NoiseModel ro;
  ro.readout = {Readout{0.1, 0.1}};
  const FrameSpectrum fr = exact_f(e, ro);
  CHECK((fr.values() - local_ideal(2, 0.8 / 3.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exact frame of the global Clifford group") {
  FrameEnsemble e;
  e.n = 2;
  e.global_clifford = true;
  const FrameSpectrum f = exact_f(e, NoiseModel::noiseless());
  CHECK(f.value(0) == doctest::Approx(1.0));
  for (std::uint64_t k = 1; k < 4; ++k) CHECK(f.value(k) == doctest::Approx(0.2).epsilon(1e-10));
  const FrameSpectrum ideal = ideal_f(2, IdealEnsemble::global_clifford);
  CHECK((ideal.values() - f.values()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("analytic spectra") {
  const FrameSpectrum l = ideal_f(4, IdealEnsemble::local_clifford_d0);
  CHECK((l.values() - local_ideal(4, 1.0 / 3.0)).cwiseAbs().maxCoeff() < 1e-15);
  const FrameSpectrum g = ideal_f(3, IdealEnsemble::global_clifford);
  CHECK(g.value(0) == 1.0);
  CHECK(g.value(5) == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("channel-level frame with a noisy first layer") {
  NoiseModel m;
  m.first_layer_ideal = false;
  m.single_qubit_channels = {PauliChannel::depolarizing(1, 0.3)};
  const double lambda = 1.0 - 4.0 * 0.3 / 3.0;
  const TensorTrain t = exact_f_tt_pauli_noise(m, Topology::brickwork(3), 0);
  CHECK((t.to_dense() - local_ideal(3, lambda / 3.0)).cwiseAbs().maxCoeff() < 1e-12);
  FrameEnsemble e;
  e.n = 2;
  CHECK((exact_f(e, m).values() - local_ideal(2, lambda / 3.0)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("channel-level frame agrees with the circuit average") {
  const NoiseModel m = local_pauli_noise();
  for (int d = 1; d <= 2; ++d) {
    FrameEnsemble e;
    e.n = 4;
    e.depth = d;
    ExactFrameOptions opt;
    opt.circuit_samples = 3000;
    opt.seed = 5 + static_cast<std::uint64_t>(d);
    const FrameSpectrum mc = exact_f(e, m, opt);
    const TensorTrain t = exact_f_tt_pauli_noise(m, Topology::brickwork(4), d);
    CHECK(t.max_rank() <= static_cast<int>(std::pow(4, d)));
    const Eigen::VectorXd exact = t.to_dense();
    CHECK(exact[0] == doctest::Approx(1.0));
    CHECK(test::fraction_within(exact, mc.values(), mc.se, 3.0) >= 0.9);
  }
}

TEST_CASE("empirical frame is unbiased") {
  const NoiseModel m = local_pauli_noise();
  const FrameSpectrum f = calibrate(zero_spec(4, 1, m, 100000, 6));
  const Eigen::VectorXd exact = exact_f_tt_pauli_noise(m, Topology::brickwork(4), 1).to_dense();
  CHECK(test::fraction_within(exact, f.f, f.se, 3.0) >= 0.9);
  CHECK(f.value(0) == 1.0);
}

TEST_CASE("ideal first layer keeps the frame diagonal") {
  FrameEnsemble e;
  e.n = 2;
  e.depth = 1;
  ExactFrameOptions opt;
  opt.circuit_samples = 2000;
  NoiseModel g;
  g.two_qubit = TwoQubitNoise::gue;
  g.gamma = 1.0;
  g.single_qubit_channels = {PauliChannel::depolarizing(1, 0.1)};
  const DiagonalityReport r = frame_diagonality(e, g, opt);
  CHECK(r.diagonal);
  CHECK(r.max_offdiag < r.threshold);
  CHECK(r.max_spread < r.spread_threshold);
}

TEST_CASE("gate-dependent first-layer noise breaks the irrep structure") {
  FrameEnsemble e;
  e.n = 1;
  NoiseModel m;
  m.first_layer_ideal = false;
  PauliChannel xflip = PauliChannel::identity(1);
  xflip.probs = {0.5, 0.5, 0.0, 0.0};
  m.single_qubit_channels = {PauliChannel::identity(1), xflip, PauliChannel::identity(1)};
  const DiagonalityReport r = frame_diagonality(e, m);
  CHECK_FALSE(r.diagonal);
  CHECK(r.max_spread > r.spread_threshold);
}

TEST_CASE("bootstrap spread matches the standard error") {
  const BootstrappedFrame b = calibrate_with_bootstrap(zero_spec(3, 1, local_pauli_noise(), 20000, 7), 200, 8);
  REQUIRE(b.replicates.cols() == 200);
  for (Eigen::Index k = 1; k < 8; ++k) {
    const Eigen::VectorXd row = b.replicates.row(k).transpose();
    const double mean = row.mean();
    const double sd = std::sqrt((row.array() - mean).square().sum() / (row.size() - 1));
    CHECK(sd == doctest::Approx(b.frame.se[k]).epsilon(0.2));
  }
  CHECK(histogram_labels(4) == std::vector<std::uint64_t>{8, 12, 14, 15});
}

TEST_CASE("tt mode fits the empirical mean") {
  AcquisitionSpec spec = zero_spec(5, 1, local_pauli_noise(), 5000, 9);
  const FrameSpectrum dense = calibrate(spec);
  CalibrationOptions o;
  o.mode = CalibrationMode::tt;
  o.chi = 32;
  const FrameSpectrum t = calibrate(spec, o);
  REQUIRE(t.tt.has_value());
  CHECK((t.tt->to_dense() - dense.f).norm() < 1e-6 * dense.f.norm());
}

TEST_CASE("tensor product of frames") {
  const FrameSpectrum a = ideal_f(1, IdealEnsemble::local_clifford_d0);
  const FrameSpectrum b = ideal_f(2, IdealEnsemble::global_clifford);
  const FrameSpectrum ab = a.tensor(b);
  CHECK(ab.n == 3);
  CHECK(ab.value(0b111) == doctest::Approx(1.0 / 15.0));
  CHECK(ab.value(0b100) == doctest::Approx(1.0 / 3.0));
  CHECK(ab.value(0b001) == doctest::Approx(0.2));
}

}  // TEST_SUITE
