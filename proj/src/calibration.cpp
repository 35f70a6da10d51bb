#include "rss/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rss/mals.hpp"
#include "rss/mpo.hpp"
#include "rss/parallel.hpp"
#include "rss/rng.hpp"

namespace rss {
namespace {

constexpr std::uint64_t kChunk = 1024;

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

// Complex MPS core [a][i][b] used to build |chi> for phi_tt.
struct MpsCore {
  int left = 1;
  int right = 1;
  std::vector<Complex> data;
  MpsCore(int l, int r) : left(l), right(r), data(static_cast<std::size_t>(l * 2 * r)) {}
  Complex& operator()(int a, int i, int b) { return data[static_cast<std::size_t>((a * 2 + i) * right + b)]; }
  Complex operator()(int a, int i, int b) const { return data[static_cast<std::size_t>((a * 2 + i) * right + b)]; }
  Eigen::MatrixXcd slice(int i) const {
    Eigen::MatrixXcd m(left, right);
    for (int a = 0; a < left; ++a)
      for (int b = 0; b < right; ++b) m(a, b) = (*this)(a, i, b);
    return m;
  }
};

class Mps {
 public:
  Mps(int n, std::uint64_t z) {
    for (int q = 0; q < n; ++q) {
      MpsCore c(1, 1);
      c(0, (z & qubit_bit(n, q)) ? 1 : 0, 0) = 1.0;
      cores_.push_back(std::move(c));
    }
  }

  void apply_1q(const Eigen::Matrix2cd& u, int q) {
    MpsCore& c = cores_[sz(q)];
    for (int a = 0; a < c.left; ++a)
      for (int b = 0; b < c.right; ++b) {
        const Complex v0 = c(a, 0, b);
        const Complex v1 = c(a, 1, b);
        c(a, 0, b) = u(0, 0) * v0 + u(0, 1) * v1;
        c(a, 1, b) = u(1, 0) * v0 + u(1, 1) * v1;
      }
  }

  void apply_mpo(const Mpo& op) {
    const Mpo open = op.periodic() ? op.to_open() : op;
    for (int l = 0; l < open.num_sites(); ++l) {
      const MpoCore& w = open.core(l);
      const MpsCore& old = cores_[sz(l)];
      MpsCore next(old.left * w.bond_in, old.right * w.bond_out);
      for (int a = 0; a < old.left; ++a)
        for (int al = 0; al < w.bond_in; ++al)
          for (int out = 0; out < 2; ++out)
            for (int in = 0; in < 2; ++in)
              for (int b = 0; b < old.right; ++b)
                for (int be = 0; be < w.bond_out; ++be)
                  next(a * w.bond_in + al, out, b * w.bond_out + be) += w(al, out, in, be) * old(a, in, b);
      cores_[sz(l)] = std::move(next);
    }
  }

  // Left-canonicalize by QR, then truncate right to left by SVD keeping
  // singular values above `cutoff` (the state has unit norm).
  void compress(double cutoff) {
    const int n = static_cast<int>(cores_.size());
    for (int l = 0; l + 1 < n; ++l) {
      MpsCore& c = cores_[sz(l)];
      Eigen::MatrixXcd m(c.left * 2, c.right);
      for (int a = 0; a < c.left; ++a)
        for (int i = 0; i < 2; ++i)
          for (int b = 0; b < c.right; ++b) m(a * 2 + i, b) = c(a, i, b);
      const Eigen::Index k = std::min(m.rows(), m.cols());
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
      const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
      const Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
      MpsCore nc(c.left, static_cast<int>(k));
      for (int a = 0; a < c.left; ++a)
        for (int i = 0; i < 2; ++i)
          for (int b = 0; b < k; ++b) nc(a, i, b) = q(a * 2 + i, b);
      c = std::move(nc);
      absorb_left(l + 1, r);
    }
    for (int l = n - 1; l >= 1; --l) {
      MpsCore& c = cores_[sz(l)];
      Eigen::MatrixXcd m(c.left, 2 * c.right);
      for (int a = 0; a < c.left; ++a)
        for (int i = 0; i < 2; ++i)
          for (int b = 0; b < c.right; ++b) m(a, i * c.right + b) = c(a, i, b);
      Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      int keep = 1;
      while (keep < svd.singularValues().size() && svd.singularValues()[keep] > cutoff) ++keep;
      const Eigen::MatrixXcd vh = svd.matrixV().leftCols(keep).adjoint();
      const Eigen::MatrixXcd us = svd.matrixU().leftCols(keep) * svd.singularValues().head(keep).asDiagonal();
      MpsCore nc(keep, c.right);
      for (int a = 0; a < keep; ++a)
        for (int i = 0; i < 2; ++i)
          for (int b = 0; b < c.right; ++b) nc(a, i, b) = vh(a, i * c.right + b);
      c = std::move(nc);
      MpsCore& p = cores_[sz(l - 1)];
      MpsCore np(p.left, keep);
      for (int a = 0; a < p.left; ++a)
        for (int i = 0; i < 2; ++i)
          for (int b = 0; b < keep; ++b) {
            Complex acc = 0;
            for (int g = 0; g < p.right; ++g) acc += p(a, i, g) * us(g, b);
            np(a, i, b) = acc;
          }
      p = std::move(np);
    }
  }

  const std::vector<MpsCore>& cores() const { return cores_; }

 private:
  void absorb_left(int l, const Eigen::MatrixXcd& r) {
    MpsCore& c = cores_[sz(l)];
    MpsCore nc(static_cast<int>(r.rows()), c.right);
    for (int a = 0; a < r.rows(); ++a)
      for (int i = 0; i < 2; ++i)
        for (int b = 0; b < c.right; ++b) {
          Complex acc = 0;
          for (int g = 0; g < c.left; ++g) acc += r(a, g) * c(g, i, b);
          nc(a, i, b) = acc;
        }
    c = std::move(nc);
  }

  std::vector<MpsCore> cores_;
};

// Orthonormal basis of r x r Hermitian matrices (real coefficients).
std::vector<Eigen::MatrixXcd> hermitian_basis(int r) {
  std::vector<Eigen::MatrixXcd> basis;
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < r; ++i) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(r, r);
    m(i, i) = 1.0;
    basis.push_back(m);
  }
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j) {
      Eigen::MatrixXcd sym = Eigen::MatrixXcd::Zero(r, r);
      sym(i, j) = s;
      sym(j, i) = s;
      basis.push_back(sym);
      Eigen::MatrixXcd anti = Eigen::MatrixXcd::Zero(r, r);
      anti(i, j) = Complex(0, s);
      anti(j, i) = Complex(0, -s);
      basis.push_back(anti);
    }
  return basis;
}

Mpo layer_mpo(const Circuit& c, const Topology& topo, int layer) {
  Mpo m = Mpo::identity(c.n);
  for (const auto& p : c.entanglers[sz(layer - 1)]) m = cnot_mpo(c.n, p, topo.is_wrap(p)).times(m);
  return m;
}

double poisson1(Rng& rng) {
  const double u = rng.uniform();
  double p = std::exp(-1.0);
  double cdf = p;
  int k = 0;
  while (u > cdf && k < 30) {
    ++k;
    p /= k;
    cdf += p;
  }
  return k;
}

void check_calibration_header(const RecordHeader& h) {
  if (h.input_state != "zero")
    throw std::invalid_argument("calibration requires records from the zero input state, got '" + h.input_state + "'");
}

FrameSpectrum fit_tt(const FrameSpectrum& mean, const CalibrationOptions& opt) {
  const TensorTrain init = TensorTrain::product(std::vector<std::array<double, 2>>(sz(mean.n), {1.0, 1.0 / 3.0}));
  MalsOptions mo;
  mo.max_rank = opt.chi;
  mo.abs_cutoff = opt.noise_floor;
  MalsResult fit = mals_fit(mean.f, init, mo);
  FrameSpectrum out = FrameSpectrum::from_tt(std::move(fit.tt), FrameProvenance::tt_fit);
  out.samples = mean.samples;
  return out;
}

}  // namespace

std::string to_string(FrameProvenance p) {
  switch (p) {
    case FrameProvenance::empirical: return "empirical";
    case FrameProvenance::exact_oracle: return "exact_oracle";
    case FrameProvenance::analytic: return "analytic";
    case FrameProvenance::tt_fit: return "tt_fit";
  }
  return "empirical";
}

FrameProvenance parse_provenance(std::string_view text) {
  if (text == "empirical") return FrameProvenance::empirical;
  if (text == "exact_oracle") return FrameProvenance::exact_oracle;
  if (text == "analytic") return FrameProvenance::analytic;
  if (text == "tt_fit") return FrameProvenance::tt_fit;
  throw std::invalid_argument("unknown frame provenance '" + std::string(text) + "'");
}

std::string to_string(CalibrationMode m) { return m == CalibrationMode::dense ? "dense" : "tt"; }

CalibrationMode parse_calibration_mode(std::string_view text) {
  if (text == "dense") return CalibrationMode::dense;
  if (text == "tt") return CalibrationMode::tt;
  throw std::invalid_argument("unknown calibration mode '" + std::string(text) + "'");
}

FrameSpectrum FrameSpectrum::dense(Eigen::VectorXd values, FrameProvenance p, Eigen::VectorXd stderrs) {
  const auto size = static_cast<std::uint64_t>(values.size());
  if (size == 0 || (size & (size - 1)) != 0) throw std::invalid_argument("FrameSpectrum: length must be a power of two");
  if (stderrs.size() != 0 && stderrs.size() != values.size())
    throw std::invalid_argument("FrameSpectrum: stderr length mismatch");
  FrameSpectrum s;
  s.n = std::countr_zero(size);
  s.f = std::move(values);
  s.se = std::move(stderrs);
  s.provenance = p;
  return s;
}

FrameSpectrum FrameSpectrum::from_tt(TensorTrain t, FrameProvenance p) {
  FrameSpectrum s;
  s.n = t.num_sites();
  s.tt = std::move(t);
  s.provenance = p;
  return s;
}

double FrameSpectrum::value(std::uint64_t k) const {
  if (has_dense()) return f[static_cast<Eigen::Index>(k)];
  if (tt) return tt->entry(k);
  throw std::logic_error("FrameSpectrum: empty spectrum");
}

double FrameSpectrum::stderr_at(std::uint64_t k) const { return se.size() ? se[static_cast<Eigen::Index>(k)] : 0.0; }

Eigen::VectorXd FrameSpectrum::values() const {
  if (has_dense()) return f;
  if (tt) {
    if (n > 20) throw std::invalid_argument("FrameSpectrum::values: n > 20");
    return tt->to_dense();
  }
  throw std::logic_error("FrameSpectrum: empty spectrum");
}

std::vector<std::uint64_t> FrameSpectrum::flagged(double guard_factor) const {
  std::vector<std::uint64_t> out;
  if (!has_dense()) return out;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    const double s = se.size() ? se[k] : 0.0;
    if (f[k] == 0.0 || std::abs(f[k]) <= guard_factor * s) out.push_back(static_cast<std::uint64_t>(k));
  }
  return out;
}

FrameSpectrum FrameSpectrum::tensor(const FrameSpectrum& other) const {
  const Eigen::VectorXd a = values();
  const Eigen::VectorXd b = other.values();
  Eigen::VectorXd out(a.size() * b.size());
  Eigen::VectorXd err;
  const bool with_err = se.size() && other.se.size();
  if (with_err) err.resize(out.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      out[i * b.size() + j] = a[i] * b[j];
      if (with_err) err[i * b.size() + j] = std::hypot(a[i] * other.se[j], b[j] * se[i]);
    }
  FrameSpectrum s = dense(std::move(out), provenance, std::move(err));
  s.samples = std::min(samples, other.samples);
  return s;
}

DenseState chi_state(const Circuit& c, std::uint64_t z) {
  DenseState s = DenseState::basis(c.n, z);
  apply_circuit_adjoint(s, c);
  return s;
}

Eigen::VectorXd phi_dense(const Circuit& c, std::uint64_t z) {
  if (c.n > 20) throw std::invalid_argument("phi_dense: n > 20");
  Eigen::VectorXd p = chi_state(c, z).probabilities();
  walsh_hadamard_inplace(std::span<double>(p.data(), static_cast<std::size_t>(p.size())));
  // phi_0 is the trace of a rank-one projector.
  p[0] = 1.0;
  return p;
}

Eigen::VectorXd phi_direct(const Circuit& c, std::uint64_t z) {
  if (c.n > 10) throw std::invalid_argument("phi_direct: n > 10");
  const DenseState chi = chi_state(c, z);
  const std::uint64_t dim = std::uint64_t{1} << c.n;
  Eigen::VectorXd out(static_cast<Eigen::Index>(dim));
  for (std::uint64_t k = 0; k < dim; ++k) {
    PauliString p(c.n);
    for (int q = 0; q < c.n; ++q)
      if (k & qubit_bit(c.n, q)) p.set(q, Pauli::Z);
    out[static_cast<Eigen::Index>(k)] = pauli_expectation(chi, p);
  }
  return out;
}

TensorTrain phi_tt(const Circuit& c, std::uint64_t z) {
  c.validate();
  const Topology topo = Topology::from_id(c.n, c.topology_id);
  Mps mps(c.n, z);
  for (int q = 0; q < c.n; ++q) mps.apply_1q(c.layers[sz(c.depth)][sz(q)].adjoint(), q);
  for (int j = c.depth; j >= 1; --j) {
    mps.apply_mpo(layer_mpo(c, topo, j));
    mps.compress(1e-13);
    for (int q = 0; q < c.n; ++q) mps.apply_1q(c.layers[sz(j - 1)][sz(q)].adjoint(), q);
  }
  // |chi_x|^2 as a real TT: each bond carries the coefficients of a Hermitian
  // r x r environment in an orthonormal basis; then a per-site WHT.
  std::vector<TtCore> cores;
  for (const MpsCore& m : mps.cores()) {
    const auto bl = hermitian_basis(m.left);
    const auto br = hermitian_basis(m.right);
    TtCore prob(m.left * m.left, m.right * m.right);
    for (int x = 0; x < 2; ++x) {
      const Eigen::MatrixXcd a = m.slice(x);
      for (std::size_t mu = 0; mu < bl.size(); ++mu) {
        const Eigen::MatrixXcd t = a.transpose() * bl[mu] * a.conjugate();
        for (std::size_t nu = 0; nu < br.size(); ++nu)
          prob(static_cast<int>(mu), x, static_cast<int>(nu)) = (br[nu] * t).trace().real();
      }
    }
    TtCore out(prob.left, prob.right);
    for (int mu = 0; mu < prob.left; ++mu)
      for (int nu = 0; nu < prob.right; ++nu) {
        out(mu, 0, nu) = prob(mu, 0, nu) + prob(mu, 1, nu);
        out(mu, 1, nu) = prob(mu, 0, nu) - prob(mu, 1, nu);
      }
    cores.push_back(std::move(out));
  }
  return tt_round(TensorTrain(std::move(cores)), Truncation{std::numeric_limits<int>::max(), 1e-13, 0.0}).tt;
}

FrameAccumulator::FrameAccumulator(int n) : n_(n) {
  const Eigen::Index dim = Eigen::Index{1} << n;
  sum_ = Eigen::VectorXd::Zero(dim);
  sum_sq_ = Eigen::VectorXd::Zero(dim);
}

void FrameAccumulator::add(const Eigen::VectorXd& phi) {
  if (phi.size() != sum_.size()) throw std::invalid_argument("FrameAccumulator: phi has the wrong length");
  sum_ += phi;
  sum_sq_ += phi.cwiseAbs2();
  ++count_;
}

void FrameAccumulator::merge(const FrameAccumulator& other) {
  if (other.n_ != n_) throw std::invalid_argument("FrameAccumulator: qubit count mismatch");
  sum_ += other.sum_;
  sum_sq_ += other.sum_sq_;
  count_ += other.count_;
}

FrameSpectrum FrameAccumulator::result() const {
  if (count_ == 0) throw std::invalid_argument("FrameAccumulator: no samples");
  const double nn = static_cast<double>(count_);
  Eigen::VectorXd mean = sum_ / nn;
  Eigen::VectorXd se = Eigen::VectorXd::Zero(mean.size());
  if (count_ > 1)
    for (Eigen::Index k = 0; k < mean.size(); ++k) {
      const double var = (sum_sq_[k] - nn * mean[k] * mean[k]) / (nn - 1);
      se[k] = std::sqrt(std::max(var, 0.0) / nn);
    }
  FrameSpectrum s = FrameSpectrum::dense(std::move(mean), FrameProvenance::empirical, std::move(se));
  s.samples = count_;
  return s;
}

BootstrapAccumulator::BootstrapAccumulator(int n, int replicates, std::uint64_t seed)
    : seed_(seed), sums_(Eigen::MatrixXd::Zero(Eigen::Index{1} << n, replicates)), weights_(sz(replicates), 0.0) {
  if (replicates < 1) throw std::invalid_argument("BootstrapAccumulator: need at least one replicate");
}

void BootstrapAccumulator::add(std::uint64_t record_index, const Eigen::VectorXd& phi) {
  Rng rng(derive_seed(seed_, record_index, "bootstrap"));
  for (std::size_t b = 0; b < weights_.size(); ++b) {
    const double w = poisson1(rng);
    if (w == 0) continue;
    weights_[b] += w;
    sums_.col(static_cast<Eigen::Index>(b)) += w * phi;
  }
}

void BootstrapAccumulator::merge(const BootstrapAccumulator& other) {
  sums_ += other.sums_;
  for (std::size_t b = 0; b < weights_.size(); ++b) weights_[b] += other.weights_[b];
}

Eigen::MatrixXd BootstrapAccumulator::replicate_means() const {
  Eigen::MatrixXd out = sums_;
  for (std::size_t b = 0; b < weights_.size(); ++b)
    if (weights_[b] > 0) out.col(static_cast<Eigen::Index>(b)) /= weights_[b];
  return out;
}

FrameSpectrum estimate_f(const RecordHeader& header, std::span<const ShadowRecord> records, const CalibrationOptions& opt) {
  check_calibration_header(header);
  if (records.empty()) throw std::invalid_argument("estimate_f: empty record set");
  for (const auto& r : records)
    if (r.circuit.n != header.n || r.circuit.depth != header.depth)
      throw std::invalid_argument("estimate_f: record does not match the header");
  const int n = header.n;
  if (opt.mode == CalibrationMode::tt && opt.streamed) {
    // Sum of per-record phi TTs, rounded in batches.
    std::optional<TensorTrain> total;
    for (std::size_t start = 0; start < records.size(); start += sz(opt.batch)) {
      const std::size_t end = std::min(records.size(), start + sz(opt.batch));
      std::optional<TensorTrain> batch;
      for (std::size_t i = start; i < end; ++i) {
        TensorTrain p = phi_tt(records[i].circuit, records[i].z);
        batch = batch ? tt_round(tt_add(*batch, p), Truncation{std::numeric_limits<int>::max(), opt.round_tol, 0.0}).tt
                      : std::move(p);
      }
      total = total ? tt_round(tt_add(*total, *batch), Truncation{std::numeric_limits<int>::max(), opt.round_tol, 0.0}).tt
                    : std::move(*batch);
    }
    const TensorTrain mean = tt_scale(*total, 1.0 / static_cast<double>(records.size()));
    const TensorTrain init = TensorTrain::product(std::vector<std::array<double, 2>>(sz(n), {1.0, 1.0 / 3.0}));
    MalsOptions mo;
    mo.max_rank = opt.chi;
    mo.abs_cutoff = opt.noise_floor;
    FrameSpectrum out = FrameSpectrum::from_tt(mals_fit(mean, init, mo).tt, FrameProvenance::tt_fit);
    out.samples = records.size();
    return out;
  }
  const std::size_t chunks = (records.size() + kChunk - 1) / kChunk;
  std::vector<FrameAccumulator> parts(chunks, FrameAccumulator(n));
  parallel_chunks(chunks, opt.threads, [&](std::size_t c) {
    const std::size_t end = std::min(records.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) parts[c].add(phi_dense(records[i].circuit, records[i].z));
  });
  FrameAccumulator total(n);
  for (const auto& p : parts) total.merge(p);
  const FrameSpectrum mean = total.result();
  return opt.mode == CalibrationMode::dense ? mean : fit_tt(mean, opt);
}

FrameSpectrum calibrate(const AcquisitionSpec& spec, const CalibrationOptions& opt) {
  check_calibration_header(spec.header);
  if (opt.mode == CalibrationMode::tt && opt.streamed) {
    const RecordSet set = acquire(spec, opt.threads);
    return estimate_f(set.header, set.records, opt);
  }
  const RecordHeader& h = spec.header;
  if (h.shots == 0) throw std::invalid_argument("calibrate: no shots");
  spec.noise.validate(h.n);
  const Topology topo = Topology::from_id(h.n, h.topology_id);
  const std::size_t chunks = static_cast<std::size_t>((h.shots + kChunk - 1) / kChunk);
  std::vector<FrameAccumulator> parts(chunks, FrameAccumulator(h.n));
  parallel_chunks(chunks, opt.threads, [&](std::size_t c) {
    const std::uint64_t end = std::min<std::uint64_t>(h.shots, (c + 1) * kChunk);
    for (std::uint64_t i = c * kChunk; i < end; ++i) {
      const ShadowRecord r = simulate_shot(spec, topo, i);
      parts[c].add(phi_dense(r.circuit, r.z));
    }
  });
  FrameAccumulator total(h.n);
  for (const auto& p : parts) total.merge(p);
  const FrameSpectrum mean = total.result();
  return opt.mode == CalibrationMode::dense ? mean : fit_tt(mean, opt);
}

BootstrappedFrame calibrate_with_bootstrap(const AcquisitionSpec& spec, int replicates, std::uint64_t bootstrap_seed,
                                           int threads) {
  const RecordHeader& h = spec.header;
  check_calibration_header(h);
  if (h.shots == 0) throw std::invalid_argument("calibrate_with_bootstrap: no shots");
  const Topology topo = Topology::from_id(h.n, h.topology_id);
  const std::size_t chunks = static_cast<std::size_t>((h.shots + kChunk - 1) / kChunk);
  std::vector<FrameAccumulator> parts(chunks, FrameAccumulator(h.n));
  std::vector<BootstrapAccumulator> boots(chunks, BootstrapAccumulator(h.n, replicates, bootstrap_seed));
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    const std::uint64_t end = std::min<std::uint64_t>(h.shots, (c + 1) * kChunk);
    for (std::uint64_t i = c * kChunk; i < end; ++i) {
      const ShadowRecord r = simulate_shot(spec, topo, i);
      const Eigen::VectorXd phi = phi_dense(r.circuit, r.z);
      parts[c].add(phi);
      boots[c].add(i, phi);
    }
  });
  FrameAccumulator total(h.n);
  BootstrapAccumulator btotal(h.n, replicates, bootstrap_seed);
  for (std::size_t c = 0; c < chunks; ++c) {
    total.merge(parts[c]);
    btotal.merge(boots[c]);
  }
  return {total.result(), btotal.replicate_means()};
}

std::vector<std::uint64_t> histogram_labels(int n) {
  std::vector<std::uint64_t> out;
  for (int ps = 1; ps <= n; ++ps) out.push_back(((std::uint64_t{1} << ps) - 1) << (n - ps));
  return out;
}

}  // namespace rss
