#include "rss/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rss/clifford.hpp"
#include "rss/rng.hpp"

namespace rss {
namespace {

// Single-qubit Pauli letters commute iff one is I or they are equal.
bool letters_commute(int a, int b) { return a == 0 || b == 0 || a == b; }

bool labels_commute(int arity, int p, int q) {
  if (arity == 1) return letters_commute(p, q);
  const int anti = static_cast<int>(!letters_commute(p / 4, q / 4)) + static_cast<int>(!letters_commute(p % 4, q % 4));
  return anti % 2 == 0;
}

}  // namespace

PauliChannel PauliChannel::identity(int arity) {
  PauliChannel c;
  c.arity = arity;
  c.probs.assign(arity == 1 ? 4 : 16, 0.0);
  c.probs[0] = 1.0;
  return c;
}

PauliChannel PauliChannel::depolarizing(int arity, double p) {
  PauliChannel c = identity(arity);
  const double others = static_cast<double>(c.probs.size() - 1);
  c.probs[0] = 1.0 - p;
  for (std::size_t i = 1; i < c.probs.size(); ++i) c.probs[i] = p / others;
  c.validate();
  return c;
}

void PauliChannel::validate() const {
  if (arity != 1 && arity != 2) throw std::invalid_argument("PauliChannel: arity must be 1 or 2");
  if (probs.size() != (arity == 1 ? 4u : 16u)) throw std::invalid_argument("PauliChannel: wrong number of probabilities");
  double total = 0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("PauliChannel: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("PauliChannel: probabilities must sum to 1");
}

bool PauliChannel::is_identity() const { return probs[0] == 1.0; }

std::vector<double> PauliChannel::transfer_eigenvalues() const {
  std::vector<double> eig(probs.size(), 0.0);
  for (std::size_t p = 0; p < probs.size(); ++p)
    for (std::size_t q = 0; q < probs.size(); ++q)
      eig[p] += probs[q] * (labels_commute(arity, static_cast<int>(p), static_cast<int>(q)) ? 1.0 : -1.0);
  return eig;
}

void NoiseModel::validate(int n) const {
  if (two_qubit == TwoQubitNoise::gue && !(gamma >= 0.0 && gamma <= 8.0))
    throw std::invalid_argument("NoiseModel: gamma must lie in [0, 8]");
  if (two_qubit == TwoQubitNoise::pauli) {
    if (two_qubit_channel.arity != 2) throw std::invalid_argument("NoiseModel: two-qubit channel needs arity 2");
    two_qubit_channel.validate();
  }
  for (const auto& c : single_qubit_channels) {
    if (c.arity != 1) throw std::invalid_argument("NoiseModel: single-qubit channel needs arity 1");
    c.validate();
  }
  if (readout.size() > 1 && static_cast<int>(readout.size()) != n)
    throw std::invalid_argument("NoiseModel: readout needs 0, 1 or n entries");
  for (const auto& r : readout)
    if (!(r.p10 >= 0 && r.p10 <= 1 && r.p01 >= 0 && r.p01 <= 1))
      throw std::invalid_argument("NoiseModel: readout probabilities must lie in [0, 1]");
}

bool NoiseModel::is_noiseless() const {
  if (two_qubit == TwoQubitNoise::gue && gamma > 0) return false;
  if (two_qubit == TwoQubitNoise::pauli && !two_qubit_channel.is_identity()) return false;
  for (const auto& c : single_qubit_channels)
    if (!c.is_identity()) return false;
  for (const auto& r : readout)
    if (r.p10 != 0 || r.p01 != 0) return false;
  return true;
}

bool NoiseModel::is_pauli() const { return !(two_qubit == TwoQubitNoise::gue && gamma > 0); }

bool NoiseModel::has_pauli_channels() const {
  if (two_qubit == TwoQubitNoise::pauli && !two_qubit_channel.is_identity()) return true;
  return std::any_of(single_qubit_channels.begin(), single_qubit_channels.end(),
                     [](const PauliChannel& c) { return !c.is_identity(); });
}

Readout NoiseModel::readout_for(int qubit) const {
  if (readout.empty()) return {};
  if (readout.size() == 1) return readout.front();
  return readout.at(static_cast<std::size_t>(qubit));
}

const PauliChannel* NoiseModel::channel_for_gate(int clifford_index) const {
  if (single_qubit_channels.empty()) return nullptr;
  if (clifford_index < 0 || single_qubit_channels.size() == 1) return &single_qubit_channels.front();
  const std::uint64_t slot = mix64(static_cast<std::uint64_t>(clifford_index)) % single_qubit_channels.size();
  return &single_qubit_channels[static_cast<std::size_t>(slot)];
}

Eigen::MatrixXcd sample_gue(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("sample_gue: dim must be positive");
  Eigen::MatrixXcd h(dim, dim);
  const double s = std::sqrt(0.5);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = rng.normal();
    for (int j = i + 1; j < dim; ++j) {
      const double re = s * rng.normal();
      const double im = s * rng.normal();
      h(i, j) = Complex(re, im);
      h(j, i) = Complex(re, -im);
    }
  }
  return h;
}

Eigen::Matrix4cd incoherent_noise_unitary(double gamma, const Eigen::MatrixXcd& hamiltonian) {
  if (hamiltonian.rows() != 4 || hamiltonian.cols() != 4) throw std::invalid_argument("incoherent_noise_unitary: need 4x4");
  if (gamma == 0.0) return Eigen::Matrix4cd::Identity();
  const Eigen::Matrix4cd h = hamiltonian;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(h);
  Eigen::Vector4cd phases;
  for (int i = 0; i < 4; ++i) phases[i] = std::polar(1.0, gamma * eig.eigenvalues()[i] / 8.0);
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

Eigen::Matrix4cd incoherent_noise_unitary(double gamma, Rng& rng) {
  if (gamma < 0) throw std::invalid_argument("incoherent_noise_unitary: gamma must be nonnegative");
  // The draw is consumed even for gamma = 0 so streams stay aligned.
  const Eigen::MatrixXcd h = sample_gue(4, rng);
  return incoherent_noise_unitary(gamma, h);
}

double infidelity_of_unitary(const Eigen::MatrixXcd& u) {
  if (!is_unitary(u, 1e-9)) throw std::invalid_argument("infidelity_of_unitary: input is not unitary");
  const double d = static_cast<double>(u.rows());
  return (d * d - std::norm(u.trace())) / (d * (d + 1));
}

double mean_incoherent_infidelity(double gamma, std::span<const Eigen::Vector4d> spectra) {
  if (spectra.empty()) throw std::invalid_argument("mean_incoherent_infidelity: no samples");
  double acc = 0;
  for (const auto& lam : spectra) {
    Complex tr = 0;
    for (int i = 0; i < 4; ++i) tr += std::polar(1.0, gamma * lam[i] / 8.0);
    acc += (16.0 - std::norm(tr)) / 20.0;
  }
  return acc / static_cast<double>(spectra.size());
}

double calibrate_gamma(double r_target, int samples, Rng& rng) {
  if (!(r_target >= 0.0 && r_target < 0.8)) throw std::invalid_argument("calibrate_gamma: target must lie in [0, 0.8)");
  if (samples < 1) throw std::invalid_argument("calibrate_gamma: need at least one sample");
  if (r_target == 0.0) return 0.0;
  std::vector<Eigen::Vector4d> spectra;
  spectra.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> eig(Eigen::Matrix4cd(sample_gue(4, rng)), Eigen::EigenvaluesOnly);
    spectra.push_back(eig.eigenvalues());
  }
  // First grid cell where the mean crosses the target, then bisection.
  constexpr double gamma_max = 8.0;
  constexpr int grid = 256;
  double lo = 0.0;
  double hi = -1.0;
  for (int i = 1; i <= grid; ++i) {
    const double g = gamma_max * i / grid;
    if (mean_incoherent_infidelity(g, spectra) >= r_target) {
      hi = g;
      break;
    }
    lo = g;
  }
  if (hi < 0) throw std::runtime_error("calibrate_gamma: target infidelity unreachable for gamma <= 8");
  for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_incoherent_infidelity(mid, spectra) < r_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

int sample_pauli_label(const PauliChannel& channel, Rng& rng) {
  if (channel.probs[0] == 1.0) return 0;
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t i = 0; i < channel.probs.size(); ++i) {
    acc += channel.probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u above the cumulative sum: return the last nonzero label.
  for (std::size_t i = channel.probs.size(); i-- > 0;)
    if (channel.probs[i] > 0) return static_cast<int>(i);
  return 0;
}

PauliString pauli_label_string(int n, std::span<const int> sites, int label) {
  PauliString p(n);
  if (sites.size() == 1) {
    p.set(sites[0], static_cast<Pauli>(label & 3));
  } else if (sites.size() == 2) {
    p.set(sites[0], static_cast<Pauli>((label >> 2) & 3));
    p.set(sites[1], static_cast<Pauli>(label & 3));
  } else {
    throw std::invalid_argument("pauli_label_string: one or two sites expected");
  }
  return p;
}

void apply_pauli_label(DenseState& state, std::span<const int> sites, int label) {
  for (int s : sites)
    if (s < 0 || s >= state.num_qubits()) throw std::out_of_range("apply_pauli_label: site out of range");
  if (label == 0) return;
  state.apply_pauli(pauli_label_string(state.num_qubits(), sites, label));
}

void apply_unitary_event(DenseState& state, std::span<const int> sites, const Eigen::MatrixXcd& u) {
  for (int s : sites)
    if (s < 0 || s >= state.num_qubits()) throw std::out_of_range("apply_unitary_event: site out of range");
  if (sites.size() == 1 && u.rows() == 2) {
    state.apply_1q(Eigen::Matrix2cd(u), sites[0]);
  } else if (sites.size() == 2 && u.rows() == 4) {
    state.apply_2q(Eigen::Matrix4cd(u), sites[0], sites[1]);
  } else {
    throw std::invalid_argument("apply_unitary_event: operator size does not match the sites");
  }
}

std::uint64_t apply_readout(std::uint64_t z, int n, const NoiseModel& noise, Rng& rng) {
  if (noise.readout.empty()) return z;
  for (int q = 0; q < n; ++q) {
    const Readout r = noise.readout_for(q);
    const std::uint64_t bit = qubit_bit(n, q);
    const double flip = (z & bit) ? r.p01 : r.p10;
    // Draw for every qubit so the stream does not depend on the outcome.
    if (rng.uniform() < flip) z ^= bit;
  }
  return z;
}

void apply_readout_confusion(std::span<double> probs, int n, const NoiseModel& noise) {
  if (noise.readout.empty()) return;
  for (int q = 0; q < n; ++q) {
    const Readout r = noise.readout_for(q);
    if (r.p10 == 0 && r.p01 == 0) continue;
    const std::size_t m = static_cast<std::size_t>(qubit_bit(n, q));
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (i & m) continue;
      const double p0 = probs[i];
      const double p1 = probs[i | m];
      probs[i] = (1 - r.p10) * p0 + r.p01 * p1;
      probs[i | m] = r.p10 * p0 + (1 - r.p01) * p1;
    }
  }
}

}  // namespace rss
