#include "rss/frame_oracles.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

#include "rss/clifford.hpp"
#include "rss/parallel.hpp"
#include "rss/rng.hpp"

namespace rss {
namespace {

constexpr std::uint64_t kChunk = 256;

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

// Diagonal Pauli-transfer function on n qubits as a TT with physical
// dimension 4 (letters I, X, Y, Z).
class PauliDiagonalTt {
 public:
  explicit PauliDiagonalTt(const std::vector<std::array<double, 4>>& sites) {
    for (const auto& s : sites) {
      Core c;
      for (int p = 0; p < 4; ++p) c[sz(p)] = Eigen::MatrixXd::Constant(1, 1, s[sz(p)]);
      cores_.push_back(std::move(c));
    }
  }

  void apply_local(const Eigen::Matrix4d& t, int site) {
    Core& c = cores_[sz(site)];
    Core out;
    for (int p = 0; p < 4; ++p) {
      out[sz(p)] = Eigen::MatrixXd::Zero(c[0].rows(), c[0].cols());
      for (int q = 0; q < 4; ++q)
        if (t(p, q) != 0) out[sz(p)] += t(p, q) * c[sz(q)];
    }
    c = std::move(out);
  }

  // g acts on the combined label 4 * p_left + p_right of neighbouring sites.
  void apply_adjacent(const Eigen::Matrix<double, 16, 16>& g, int left) {
    Core& c0 = cores_[sz(left)];
    Core& c1 = cores_[sz(left + 1)];
    const Eigen::Index a = c0[0].rows();
    const Eigen::Index b = c1[0].cols();
    std::array<Eigen::MatrixXd, 16> theta;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) theta[sz(4 * p + q)] = c0[sz(p)] * c1[sz(q)];
    Eigen::MatrixXd m(a * 4, 4 * b);
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(a, b);
        for (int in = 0; in < 16; ++in)
          if (g(4 * p + q, in) != 0) acc += g(4 * p + q, in) * theta[sz(in)];
        for (Eigen::Index i = 0; i < a; ++i) m.block(i * 4 + p, q * b, 1, b) = acc.row(i);
      }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    int r = 1;
    while (r < s.size() && s[r] > 1e-14 * s[0]) ++r;
    const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
    const Eigen::MatrixXd sv = s.head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    for (int p = 0; p < 4; ++p) {
      c0[sz(p)].resize(a, r);
      for (Eigen::Index i = 0; i < a; ++i) c0[sz(p)].row(i) = u.row(i * 4 + p);
      c1[sz(p)] = sv.middleCols(p * b, b);
    }
  }

  // Two-site map on arbitrary sites (s0 carries the first label), moving s1
  // next to s0 with label swaps and back.
  void apply_pair(const Eigen::Matrix<double, 16, 16>& g, int s0, int s1) {
    if (s0 == s1) throw std::invalid_argument("apply_pair: identical sites");
    Eigen::Matrix<double, 16, 16> swap = Eigen::Matrix<double, 16, 16>::Zero();
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) swap(4 * q + p, 4 * p + q) = 1.0;
    const int lo = std::min(s0, s1);
    const int hi = std::max(s0, s1);
    for (int s = hi - 1; s > lo; --s) apply_adjacent(swap, s);
    // The far site now sits at lo + 1.
    apply_adjacent(s0 < s1 ? g : Eigen::Matrix<double, 16, 16>(swap * g * swap), lo);
    for (int s = lo + 1; s < hi; ++s) apply_adjacent(swap, s);
  }

  // k = 0 selects the identity letter; k = 1 the (equal) X, Y, Z average.
  TensorTrain project() const {
    std::vector<TtCore> out;
    for (const Core& c : cores_) {
      TtCore t(static_cast<int>(c[0].rows()), static_cast<int>(c[0].cols()));
      const Eigen::MatrixXd avg = (c[1] + c[2] + c[3]) / 3.0;
      for (int a = 0; a < t.left; ++a)
        for (int b = 0; b < t.right; ++b) {
          t(a, 0, b) = c[0](a, b);
          t(a, 1, b) = avg(a, b);
        }
      out.push_back(std::move(t));
    }
    return TensorTrain(std::move(out));
  }

 private:
  using Core = std::array<Eigen::MatrixXd, 4>;
  std::vector<Core> cores_;
};

// (x, z) bits of a Pauli letter and back.
std::array<int, 2> letter_bits(int p) { return {p == 1 || p == 2, p == 2 || p == 3}; }
int bits_letter(int x, int z) { return x ? (z ? 2 : 1) : (z ? 3 : 0); }

// Label of CNOT P CNOT for P = P_c (x) P_t, as 4 * control + target.
int cnot_conjugate(int label) {
  auto [xc, zc] = letter_bits(label / 4);
  auto [xt, zt] = letter_bits(label % 4);
  xt ^= xc;
  zc ^= zt;
  return 4 * bits_letter(xc, zc) + bits_letter(xt, zt);
}

Eigen::Matrix<double, 16, 16> cnot_transfer(const NoiseModel& noise) {
  std::vector<double> lambda(16, 1.0);
  if (noise.two_qubit == TwoQubitNoise::pauli) lambda = noise.two_qubit_channel.transfer_eigenvalues();
  Eigen::Matrix<double, 16, 16> g = Eigen::Matrix<double, 16, 16>::Zero();
  for (int a = 0; a < 16; ++a) {
    const int pa = cnot_conjugate(a);
    g(a, pa) = lambda[sz(pa)];
  }
  return g;
}

std::vector<double> unit_eigenvalues() { return {1.0, 1.0, 1.0, 1.0}; }

// Twirl of a diagonal transfer function by one layer of single-qubit gates,
// each followed by its Pauli channel: T(p, q) = E_u [pi_u(p) = q] lambda_u(q).
Eigen::Matrix4d layer_twirl(const NoiseModel& noise, Ensemble ensemble, bool noisy) {
  const auto& cliffords = single_qubit_cliffords();
  Eigen::Matrix4d t = Eigen::Matrix4d::Zero();
  for (std::size_t u = 0; u < cliffords.size(); ++u) {
    std::vector<double> lambda = unit_eigenvalues();
    if (noisy) {
      const int gate = ensemble == Ensemble::haar ? -1 : static_cast<int>(u);
      if (const PauliChannel* ch = noise.channel_for_gate(gate)) lambda = ch->transfer_eigenvalues();
    }
    for (int p = 0; p < 4; ++p) {
      const int q = static_cast<int>(cliffords[u].image[sz(p)]);
      t(p, q) += lambda[sz(q)] / static_cast<double>(cliffords.size());
    }
  }
  return t;
}

void check_local_ensemble(const FrameEnsemble& ens) {
  if (ens.n < 1 || ens.n > 8) throw std::invalid_argument("exact_f: n must lie in [1, 8]");
  if (ens.depth < 0) throw std::invalid_argument("exact_f: negative depth");
}

std::vector<Circuit> enumerate_d0(const FrameEnsemble& ens) {
  const auto& cl = single_qubit_cliffords();
  const Topology topo = Topology::from_id(ens.n, ens.topology_id);
  std::vector<Circuit> out;
  std::uint64_t total = 1;
  for (int q = 0; q < ens.n; ++q) total *= cl.size();
  for (std::uint64_t i = 0; i < total; ++i) {
    Circuit c = identity_circuit(ens.n, 0, topo);
    c.ensemble = Ensemble::clifford1q;
    std::uint64_t rest = i;
    for (int q = ens.n - 1; q >= 0; --q) {
      const std::size_t idx = static_cast<std::size_t>(rest % cl.size());
      rest /= cl.size();
      c.layers[0][sz(q)] = cl[idx].matrix;
      c.clifford_index[0][sz(q)] = static_cast<int>(idx);
    }
    out.push_back(std::move(c));
  }
  return out;
}

bool enumerable(const FrameEnsemble& ens, const ExactFrameOptions& opt) {
  return opt.enumerate && ens.ensemble == Ensemble::clifford1q && ens.depth == 0 && ens.n <= 2;
}

// sum_z p_z |U_{zx}|^2, transformed.
Eigen::VectorXd phi_average_from(const Eigen::MatrixXcd& u, const Eigen::VectorXd& p) {
  Eigen::VectorXd a = u.cwiseAbs2().transpose() * p;
  walsh_hadamard_inplace(std::span<double>(a.data(), static_cast<std::size_t>(a.size())));
  return a;
}

FrameSpectrum global_clifford_f(const FrameEnsemble& ens, const NoiseModel& noise, const ExactFrameOptions& opt) {
  if (ens.n > 2) throw std::invalid_argument("exact_f: global Clifford ensemble supported for n <= 2");
  if (noise.has_pauli_channels() || (noise.two_qubit == TwoQubitNoise::gue && noise.gamma > 0))
    throw std::invalid_argument("exact_f: global Clifford ensemble supports readout noise only");
  std::vector<Eigen::MatrixXcd> group;
  if (ens.n == 1)
    for (const auto& c : single_qubit_cliffords()) group.push_back(c.matrix);
  const std::size_t count = ens.n == 1 ? group.size() : two_qubit_cliffords().size();
  auto element = [&](std::size_t i) -> Eigen::MatrixXcd {
    return ens.n == 1 ? group[i] : Eigen::MatrixXcd(two_qubit_cliffords()[i]);
  };
  const std::uint64_t samples = opt.enumerate ? count : static_cast<std::uint64_t>(opt.circuit_samples);
  const std::size_t chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  std::vector<FrameAccumulator> parts(chunks, FrameAccumulator(ens.n));
  parallel_chunks(chunks, opt.threads, [&](std::size_t c) {
    const std::uint64_t end = std::min<std::uint64_t>(samples, (c + 1) * kChunk);
    for (std::uint64_t i = c * kChunk; i < end; ++i) {
      std::size_t idx = static_cast<std::size_t>(i);
      if (!opt.enumerate) {
        Rng rng(derive_seed(opt.seed, i, "circuit"));
        idx = static_cast<std::size_t>(rng.below(count));
      }
      const Eigen::MatrixXcd u = element(idx);
      Eigen::VectorXd p = u.col(0).cwiseAbs2();
      apply_readout_confusion(std::span<double>(p.data(), static_cast<std::size_t>(p.size())), ens.n, noise);
      parts[c].add(phi_average_from(u, p));
    }
  });
  FrameAccumulator total(ens.n);
  for (const auto& p : parts) total.merge(p);
  FrameSpectrum s = total.result();
  s.provenance = FrameProvenance::exact_oracle;
  if (opt.enumerate) s.se.setZero();
  return s;
}

}  // namespace

FrameSpectrum ideal_f(int n, IdealEnsemble ensemble) {
  if (n < 1 || n > 26) throw std::invalid_argument("ideal_f: n must lie in [1, 26]");
  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::VectorXd f(static_cast<Eigen::Index>(dim));
  for (std::uint64_t k = 0; k < dim; ++k) {
    if (ensemble == IdealEnsemble::local_clifford_d0)
      f[static_cast<Eigen::Index>(k)] = std::pow(3.0, -pauli_weight(k));
    else
      f[static_cast<Eigen::Index>(k)] = k == 0 ? 1.0 : 1.0 / (static_cast<double>(dim) + 1.0);
  }
  return FrameSpectrum::dense(std::move(f), FrameProvenance::analytic);
}

Circuit oracle_circuit(const FrameEnsemble& ens, std::uint64_t seed, std::uint64_t index) {
  Rng rng(derive_seed(seed, index, "circuit"));
  return sample_circuit(ens.n, ens.depth, ens.ensemble, Topology::from_id(ens.n, ens.topology_id), rng);
}

UnitaryEvents oracle_events(const Circuit& c, const NoiseModel& noise, std::uint64_t seed, std::uint64_t index) {
  Rng rng(derive_seed(seed, index, "noise"));
  return sample_unitary_events(c, noise, rng);
}

Eigen::VectorXd exact_phi_average(const Circuit& c, const NoiseModel& noise, const UnitaryEvents* events) {
  const Eigen::VectorXd p = outcome_distribution(DenseState(c.n), c, noise, events);
  return phi_average_from(circuit_unitary(c), p);
}

FrameSpectrum exact_f(const FrameEnsemble& ens, const NoiseModel& noise, const ExactFrameOptions& opt) {
  check_local_ensemble(ens);
  noise.validate(ens.n);
  if (ens.global_clifford) return global_clifford_f(ens, noise, opt);
  const bool full = enumerable(ens, opt);
  const std::vector<Circuit> group = full ? enumerate_d0(ens) : std::vector<Circuit>{};
  const std::uint64_t samples = full ? group.size() : static_cast<std::uint64_t>(opt.circuit_samples);
  if (samples == 0) throw std::invalid_argument("exact_f: no circuit samples");
  const std::size_t chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  std::vector<FrameAccumulator> parts(chunks, FrameAccumulator(ens.n));
  parallel_chunks(chunks, opt.threads, [&](std::size_t c) {
    const std::uint64_t end = std::min<std::uint64_t>(samples, (c + 1) * kChunk);
    for (std::uint64_t i = c * kChunk; i < end; ++i) {
      const Circuit circ = full ? group[static_cast<std::size_t>(i)] : oracle_circuit(ens, opt.seed, i);
      const UnitaryEvents ev = oracle_events(circ, noise, opt.seed, i);
      parts[c].add(exact_phi_average(circ, noise, &ev));
    }
  });
  FrameAccumulator total(ens.n);
  for (const auto& p : parts) total.merge(p);
  FrameSpectrum s = total.result();
  s.provenance = FrameProvenance::exact_oracle;
  if (full) s.se.setZero();
  return s;
}

TensorTrain exact_f_tt_pauli_noise(const NoiseModel& noise, const Topology& topology, int depth, Ensemble ensemble) {
  const int n = topology.num_qubits();
  noise.validate(n);
  if (!noise.is_pauli()) throw std::invalid_argument("exact_f_tt_pauli_noise: noise must consist of Pauli channels");
  if (depth < 0) throw std::invalid_argument("exact_f_tt_pauli_noise: negative depth");
  if (!noise.first_layer_ideal && ensemble == Ensemble::clifford1q && noise.single_qubit_channels.size() > 1)
    throw std::invalid_argument("exact_f_tt_pauli_noise: first-layer noise must be gate-independent");
  // Measurement with readout confusion, diagonal part (the off-diagonal I -> Z
  // term is removed by the last twirl).
  std::vector<std::array<double, 4>> m;
  for (int q = 0; q < n; ++q) {
    const Readout r = noise.readout_for(q);
    m.push_back({1.0, 0.0, 0.0, 1.0 - r.p10 - r.p01});
  }
  PauliDiagonalTt x(m);
  const Eigen::Matrix4d noisy_twirl = layer_twirl(noise, ensemble, true);
  const Eigen::Matrix<double, 16, 16> cnot = cnot_transfer(noise);
  for (int j = depth; j >= 0; --j) {
    const Eigen::Matrix4d t = j == 0 ? layer_twirl(noise, ensemble, !noise.first_layer_ideal) : noisy_twirl;
    for (int q = 0; q < n; ++q) x.apply_local(t, q);
    if (j == 0) break;
    for (const auto& p : topology.pattern(topology.pattern_index_for_layer(j))) x.apply_pair(cnot, p.control, p.target);
  }
  return tt_round(x.project(), Truncation{std::numeric_limits<int>::max(), 1e-13, 0.0}).tt;
}

DiagonalityReport frame_diagonality(const FrameEnsemble& ens, const NoiseModel& noise, const ExactFrameOptions& opt) {
  check_local_ensemble(ens);
  if (ens.n > 3) throw std::invalid_argument("frame_diagonality: n must be at most 3");
  if (ens.global_clifford) throw std::invalid_argument("frame_diagonality: local ensembles only");
  noise.validate(ens.n);
  const int n = ens.n;
  const Eigen::Index d = Eigen::Index{1} << n;
  const Eigen::Index np = d * d;
  std::vector<PauliString> paulis;
  std::vector<Eigen::MatrixXcd> mats;
  for (std::uint64_t a = 0; a < static_cast<std::uint64_t>(np); ++a) {
    paulis.push_back(PauliString::from_index(n, a, PauliNorm::frobenius));
    mats.push_back(paulis.back().matrix());
  }
  const bool full = enumerable(ens, opt);
  const std::vector<Circuit> group = full ? enumerate_d0(ens) : std::vector<Circuit>{};
  const std::uint64_t samples = full ? group.size() : static_cast<std::uint64_t>(opt.circuit_samples);
  // Block of each Pauli and, per sample, deviation of S_aa from its block mean.
  std::map<std::uint64_t, std::vector<Eigen::Index>> blocks;
  for (Eigen::Index a = 0; a < np; ++a) blocks[irrep_label(paulis[static_cast<std::size_t>(a)]).bits].push_back(a);
  struct Sums {
    Eigen::MatrixXd s, s2;
    Eigen::VectorXd dev, dev2;
  };
  const std::size_t chunks = static_cast<std::size_t>((samples + kChunk - 1) / kChunk);
  std::vector<Sums> parts(chunks, Sums{Eigen::MatrixXd::Zero(np, np), Eigen::MatrixXd::Zero(np, np),
                                       Eigen::VectorXd::Zero(np), Eigen::VectorXd::Zero(np)});
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  parallel_chunks(chunks, opt.threads, [&](std::size_t c) {
    const std::uint64_t end = std::min<std::uint64_t>(samples, (c + 1) * kChunk);
    for (std::uint64_t i = c * kChunk; i < end; ++i) {
      const Circuit circ = full ? group[static_cast<std::size_t>(i)] : oracle_circuit(ens, opt.seed, i);
      const UnitaryEvents ev = oracle_events(circ, noise, opt.seed, i);
      const Eigen::MatrixXcd udag = circuit_unitary(circ).adjoint();
      Eigen::MatrixXd u(d, np), v(d, np);
      for (Eigen::Index z = 0; z < d; ++z) {
        const DenseState chi = DenseState::from_amplitudes(udag.col(z));
        for (Eigen::Index a = 0; a < np; ++a)
          u(z, a) = pauli_expectation(chi, paulis[static_cast<std::size_t>(a)]) * inv_sqrt_d;
      }
      for (Eigen::Index b = 0; b < np; ++b) v.col(b) = outcome_functional(mats[static_cast<std::size_t>(b)], circ, noise, &ev);
      const Eigen::MatrixXd sg = u.transpose() * v;
      parts[c].s += sg;
      parts[c].s2 += sg.cwiseAbs2();
      for (const auto& [k, members] : blocks) {
        double mean = 0;
        for (Eigen::Index a : members) mean += sg(a, a);
        mean /= static_cast<double>(members.size());
        for (Eigen::Index a : members) {
          parts[c].dev[a] += sg(a, a) - mean;
          parts[c].dev2[a] += (sg(a, a) - mean) * (sg(a, a) - mean);
        }
      }
    }
  });
  Sums total{Eigen::MatrixXd::Zero(np, np), Eigen::MatrixXd::Zero(np, np), Eigen::VectorXd::Zero(np),
             Eigen::VectorXd::Zero(np)};
  for (const auto& p : parts) {
    total.s += p.s;
    total.s2 += p.s2;
    total.dev += p.dev;
    total.dev2 += p.dev2;
  }
  const double ns = static_cast<double>(samples);
  auto stderr_of = [&](double sum, double sum2) {
    if (full || samples < 2) return 0.0;
    const double mean = sum / ns;
    return std::sqrt(std::max(0.0, (sum2 - ns * mean * mean) / (ns - 1)) / ns);
  };
  DiagonalityReport rep;
  rep.mean = total.s / ns;
  rep.se = Eigen::MatrixXd::Zero(np, np);
  double max_se = 0;
  for (Eigen::Index a = 0; a < np; ++a)
    for (Eigen::Index b = 0; b < np; ++b) {
      rep.se(a, b) = stderr_of(total.s(a, b), total.s2(a, b));
      max_se = std::max(max_se, rep.se(a, b));
      if (a != b) rep.max_offdiag = std::max(rep.max_offdiag, std::abs(rep.mean(a, b)));
    }
  double max_dev_se = 0;
  for (Eigen::Index a = 0; a < np; ++a) {
    rep.max_spread = std::max(rep.max_spread, std::abs(total.dev[a] / ns));
    max_dev_se = std::max(max_dev_se, stderr_of(total.dev[a], total.dev2[a]));
  }
  rep.threshold = 4.0 * max_se + 1e-12;
  rep.spread_threshold = 4.0 * max_dev_se + 1e-12;
  rep.diagonal = rep.max_offdiag < rep.threshold && rep.max_spread < rep.spread_threshold;
  return rep;
}

}  // namespace rss
