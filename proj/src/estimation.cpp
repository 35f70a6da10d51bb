#include "rss/estimation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rss/mals.hpp"

namespace rss {
namespace {

int qubits_of(const Eigen::MatrixXcd& x) {
  const auto d = static_cast<std::uint64_t>(x.rows());
  if (x.rows() != x.cols() || d == 0 || !std::has_single_bit(d)) throw std::invalid_argument("operator must be 2^n x 2^n");
  const int n = std::countr_zero(d);
  if (n > 12) throw std::invalid_argument("operator larger than 12 qubits");
  return n;
}

// In place: each 2x2 block of qubit q becomes its (I, Z; X, Y) coefficients.
void to_pauli_coefficients(Eigen::MatrixXcd& m, int n) {
  const Eigen::Index d = m.rows();
  const Complex i(0, 1);
  for (int q = 0; q < n; ++q) {
    const auto b = static_cast<Eigen::Index>(qubit_bit(n, q));
    for (Eigen::Index r = 0; r < d; ++r) {
      if (r & b) continue;
      for (Eigen::Index c = 0; c < d; ++c) {
        if (c & b) continue;
        const Complex m00 = m(r, c), m01 = m(r, c | b), m10 = m(r | b, c), m11 = m(r | b, c | b);
        m(r, c) = 0.5 * (m00 + m11);
        m(r, c | b) = 0.5 * (m00 - m11);
        m(r | b, c) = 0.5 * (m01 + m10);
        m(r | b, c | b) = 0.5 * i * (m01 - m10);
      }
    }
  }
}

void from_pauli_coefficients(Eigen::MatrixXcd& m, int n) {
  const Eigen::Index d = m.rows();
  const Complex i(0, 1);
  for (int q = 0; q < n; ++q) {
    const auto b = static_cast<Eigen::Index>(qubit_bit(n, q));
    for (Eigen::Index r = 0; r < d; ++r) {
      if (r & b) continue;
      for (Eigen::Index c = 0; c < d; ++c) {
        if (c & b) continue;
        const Complex ai = m(r, c), az = m(r, c | b), ax = m(r | b, c), ay = m(r | b, c | b);
        m(r, c) = ai + az;
        m(r | b, c | b) = ai - az;
        m(r, c | b) = ax - i * ay;
        m(r | b, c) = ax + i * ay;
      }
    }
  }
}

double frame_value(const FrameSpectrum& f, std::uint64_t k) {
  const double v = f.value(k);
  if (v == 0.0) throw std::domain_error("frame entry is zero at k = " + bitstring(k, f.n));
  return v;
}

std::vector<std::uint64_t> all_nonzero_labels(int n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t k = 1; k < (std::uint64_t{1} << n); ++k) out.push_back(k);
  return out;
}

}  // namespace

Observable Observable::pauli_sum(std::vector<std::pair<double, PauliString>> terms, std::string id) {
  if (terms.empty()) throw std::invalid_argument("Observable: empty Pauli sum");
  const int n = terms.front().second.num_qubits();
  for (auto& [c, p] : terms) {
    if (!std::isfinite(c)) throw std::invalid_argument("Observable: non-finite coefficient");
    if (p.num_qubits() != n) throw std::invalid_argument("Observable: mixed qubit counts");
    p = p.with_normalization(PauliNorm::unit_operator);
  }
  Observable o;
  o.terms = std::move(terms);
  o.id = id.empty() ? o.terms.front().second.str() : std::move(id);
  return o;
}

Observable Observable::pure_target(DenseState psi, std::string id) {
  if (std::abs(psi.norm2() - 1.0) > 1e-10) throw std::invalid_argument("Observable: target state is not normalized");
  Observable o;
  o.target = std::move(psi);
  o.id = id.empty() ? "fidelity" : std::move(id);
  return o;
}

Observable Observable::parse(std::string_view text) {
  std::vector<std::pair<double, PauliString>> terms;
  std::size_t pos = 0;
  // A sign directly after '*' or an exponent 'e' belongs to a number.
  auto next_sign = [&](std::size_t from) {
    std::size_t end = text.find_first_of("+-", from);
    while (end != std::string_view::npos && (text[end - 1] == '*' || text[end - 1] == 'e' || text[end - 1] == 'E'))
      end = text.find_first_of("+-", end + 1);
    return end;
  };
  while (pos < text.size()) {
    const std::size_t end = next_sign(pos + 1);
    std::string_view term = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    double sign = 1.0;
    if (!term.empty() && (term.front() == '+' || term.front() == '-')) {
      if (term.front() == '-') sign = -1.0;
      term.remove_prefix(1);
    }
    double coef = 1.0;
    if (const auto star = term.find('*'); star != std::string_view::npos) {
      coef = std::stod(std::string(term.substr(0, star)));
      term.remove_prefix(star + 1);
    }
    terms.emplace_back(sign * coef, PauliString::parse(term));
    if (end == std::string_view::npos) break;
    pos = end;
  }
  return pauli_sum(std::move(terms), std::string(text));
}

int Observable::num_qubits() const { return target ? target->num_qubits() : terms.front().second.num_qubits(); }

Eigen::MatrixXcd Observable::matrix() const {
  if (num_qubits() > 12) throw std::invalid_argument("Observable::matrix: n > 12");
  if (target) return target->amplitudes() * target->amplitudes().adjoint();
  const Eigen::Index d = Eigen::Index{1} << num_qubits();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& [c, p] : terms) m += c * p.matrix();
  return m;
}

Eigen::MatrixXcd apply_frame_function(const Eigen::MatrixXcd& x, const Eigen::VectorXd& s) {
  const int n = qubits_of(x);
  if (s.size() != x.rows()) throw std::invalid_argument("apply_frame_function: spectrum length mismatch");
  Eigen::MatrixXcd m = x;
  to_pauli_coefficients(m, n);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) *= s[r | c];
  from_pauli_coefficients(m, n);
  return m;
}

Eigen::VectorXd sector_weights(const Eigen::MatrixXcd& x) {
  const int n = qubits_of(x);
  Eigen::MatrixXcd m = x;
  to_pauli_coefficients(m, n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) w[r | c] += std::norm(m(r, c));
  return w;
}

DualEvaluator::DualEvaluator(const Observable& obs, const FrameSpectrum& frame, const DualOptions& opt)
    : n_(obs.num_qubits()), pure_(obs.target.has_value()) {
  if (frame.n != n_) throw std::invalid_argument("DualEvaluator: frame and observable qubit counts differ");
  const std::vector<std::uint64_t> flagged = opt.allow_flagged ? std::vector<std::uint64_t>{} : frame.flagged(opt.guard_factor);
  // Reciprocal spectrum, dense or from a low-rank TT fit.
  Eigen::VectorXd inv;
  if (opt.tt_inverse) {
    const TensorTrain t = frame.tt ? *frame.tt : tt_svd(frame.values()).tt;
    InverseFit fit = tt_elementwise_inverse_fit(t, opt.inverse_rank, 1e-300);
    probe_error_ = fit.probe_error;
    inv = fit.tt.to_dense();
  } else {
    const Eigen::VectorXd f = frame.values();
    inv.resize(f.size());
    for (Eigen::Index k = 0; k < f.size(); ++k) inv[k] = f[k] != 0.0 ? 1.0 / f[k] : 0.0;
  }
  auto check_sector = [&](std::uint64_t k) {
    if (std::binary_search(flagged.begin(), flagged.end(), k))
      throw std::domain_error("DualEvaluator: observable touches non-invertible sector k = " + bitstring(k, n_));
    if (frame.value(k) == 0.0) throw std::domain_error("DualEvaluator: zero frame entry at k = " + bitstring(k, n_));
  };
  if (pure_) {
    const Eigen::MatrixXcd o = obs.matrix();
    const Eigen::VectorXd w = sector_weights(o);
    for (Eigen::Index k = 0; k < w.size(); ++k)
      if (w[k] > 1e-28) check_sector(static_cast<std::uint64_t>(k));
    dual_operator_ = apply_frame_function(o, inv);
  } else {
    for (const auto& [c, p] : obs.terms) {
      const std::uint64_t k = irrep_label(p).bits;
      if (c == 0.0) continue;
      check_sector(k);
      scaled_terms_.emplace_back(c * inv[static_cast<Eigen::Index>(k)], p);
    }
  }
}

double DualEvaluator::operator()(const Circuit& c, std::uint64_t z) const {
  if (c.n != n_) throw std::invalid_argument("DualEvaluator: record has the wrong qubit count");
  const DenseState chi = chi_state(c, z);
  if (pure_) {
    const Eigen::VectorXcd& a = chi.amplitudes();
    return a.dot(dual_operator_ * a).real();
  }
  double acc = 0;
  for (const auto& [coef, p] : scaled_terms_) acc += coef * pauli_expectation(chi, p);
  return acc;
}

double dual_eval(const Observable& obs, const ShadowRecord& record, const FrameSpectrum& frame, const DualOptions& opt) {
  return DualEvaluator(obs, frame, opt)(record);
}

Estimate summarize(std::span<const double> values, std::string observable, std::string frame) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  Estimate e;
  e.observable = std::move(observable);
  e.frame = std::move(frame);
  e.shots = values.size();
  const double n = static_cast<double>(values.size());
  e.value = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - e.value) * (v - e.value);
    e.se = std::sqrt(ss / (n - 1) / n);
  }
  return e;
}

Estimate summarize_median_of_means(std::span<const double> values, int batches, std::string observable,
                                   std::string frame) {
  if (batches < 1 || values.size() < static_cast<std::size_t>(batches))
    throw std::invalid_argument("summarize_median_of_means: need at least one value per batch");
  std::vector<double> means;
  const std::size_t per = values.size() / static_cast<std::size_t>(batches);
  for (int b = 0; b < batches; ++b) {
    const auto part = values.subspan(static_cast<std::size_t>(b) * per, per);
    means.push_back(std::accumulate(part.begin(), part.end(), 0.0) / static_cast<double>(per));
  }
  Estimate e = summarize(means, std::move(observable), std::move(frame));
  std::vector<double> sorted = means;
  std::sort(sorted.begin(), sorted.end());
  e.value = sorted.size() % 2 ? sorted[sorted.size() / 2] : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  e.shots = per * static_cast<std::size_t>(batches);
  return e;
}

Estimate estimate(const Observable& obs, std::span<const ShadowRecord> records, const FrameSpectrum& frame,
                  const DualOptions& opt) {
  if (records.empty()) throw std::invalid_argument("estimate: empty record set");
  const DualEvaluator eval(obs, frame, opt);
  std::vector<double> values;
  values.reserve(records.size());
  for (const auto& r : records) values.push_back(eval(r));
  Estimate e = summarize(values, obs.id, to_string(frame.provenance));
  e.inverse_probe_error = eval.inverse_probe_error();
  return e;
}

double worst_case_bias_over(const FrameSpectrum& f_ideal, const FrameSpectrum& f_noisy,
                            std::span<const std::uint64_t> labels) {
  if (f_ideal.n != f_noisy.n) throw std::invalid_argument("worst_case_bias: qubit counts differ");
  double worst = 0;
  for (std::uint64_t k : labels) worst = std::max(worst, std::abs(1.0 - f_noisy.value(k) / frame_value(f_ideal, k)));
  return worst;
}

double worst_case_bias(const FrameSpectrum& f_ideal, const FrameSpectrum& f_noisy) {
  const auto labels = all_nonzero_labels(f_ideal.n);
  return worst_case_bias_over(f_ideal, f_noisy, labels);
}

double worst_case_bias_by_support(const FrameSpectrum& f_ideal, const FrameSpectrum& f_noisy, int support) {
  if (support < 0 || support > f_ideal.n) throw std::invalid_argument("worst_case_bias_by_support: no label of that weight");
  std::vector<std::uint64_t> labels;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << f_ideal.n); ++k)
    if (pauli_weight(k) == support) labels.push_back(k);
  return worst_case_bias_over(f_ideal, f_noisy, labels);
}

double bias_of_estimation(const Observable& obs, const DenseState& state, const FrameSpectrum& f_ideal,
                          const FrameSpectrum& f_noisy) {
  if (obs.num_qubits() != state.num_qubits() || f_ideal.n != state.num_qubits() || f_noisy.n != state.num_qubits())
    throw std::invalid_argument("bias_of_estimation: qubit counts differ");
  const std::uint64_t dim = std::uint64_t{1} << state.num_qubits();
  Eigen::VectorXd s(static_cast<Eigen::Index>(dim));
  for (std::uint64_t k = 0; k < dim; ++k) s[static_cast<Eigen::Index>(k)] = 1.0 - f_noisy.value(k) / frame_value(f_ideal, k);
  const Eigen::VectorXcd& a = state.amplitudes();
  const Eigen::MatrixXcd rho = a * a.adjoint();
  const Eigen::MatrixXcd diff = apply_frame_function(rho, s);
  return std::abs((obs.matrix().adjoint() * diff).trace());
}

}  // namespace rss
