#include "rss/tensor_train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace rss {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd slice(const TtCore& c, int i) {
  Eigen::MatrixXd m(c.left, c.right);
  for (int a = 0; a < c.left; ++a)
    for (int b = 0; b < c.right; ++b) m(a, b) = c(a, i, b);
  return m;
}

// Rank kept after truncating singular values `s` (descending) with a per-bond
// budget `delta`; writes the discarded norm. Values at rounding level are
// always dropped.
int choose_rank(const Eigen::VectorXd& s, const Truncation& t, double delta, double& discarded) {
  int r = static_cast<int>(s.size());
  double tail2 = 0;
  const double zero = s.size() ? 1e-14 * s[0] : 0.0;
  while (r > 1) {
    const double next = s[r - 1];
    if (next <= t.abs_tol || next <= zero || tail2 + next * next <= delta * delta || r > t.max_rank) {
      tail2 += next * next;
      --r;
    } else {
      break;
    }
  }
  discarded = std::sqrt(tail2);
  return r;
}

struct ThinQr {
  Eigen::MatrixXd q;
  Eigen::MatrixXd r;
};

ThinQr thin_qr(const Eigen::MatrixXd& m) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  ThinQr out;
  out.q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return out;
}

int log2_exact(Eigen::Index size) {
  if (size < 1 || !std::has_single_bit(static_cast<std::uint64_t>(size)))
    throw std::invalid_argument("tensor train: vector length must be a power of two");
  return std::countr_zero(static_cast<std::uint64_t>(size));
}

void check_same_sites(const TensorTrain& a, const TensorTrain& b) {
  if (a.num_sites() != b.num_sites()) throw std::invalid_argument("tensor train: site count mismatch");
}

}  // namespace

Eigen::MatrixXd TtCore::left_unfolding() const {
  return Eigen::Map<const RowMatrix>(data.data(), static_cast<Eigen::Index>(left) * 2, right);
}

Eigen::MatrixXd TtCore::right_unfolding() const {
  return Eigen::Map<const RowMatrix>(data.data(), left, static_cast<Eigen::Index>(right) * 2);
}

TtCore TtCore::from_left_unfolding(const Eigen::MatrixXd& m, int left) {
  if (m.rows() != static_cast<Eigen::Index>(left) * 2) throw std::invalid_argument("TtCore: bad left unfolding");
  TtCore c(left, static_cast<int>(m.cols()));
  Eigen::Map<RowMatrix>(c.data.data(), m.rows(), m.cols()) = m;
  return c;
}

TtCore TtCore::from_right_unfolding(const Eigen::MatrixXd& m, int right) {
  if (m.cols() != static_cast<Eigen::Index>(right) * 2) throw std::invalid_argument("TtCore: bad right unfolding");
  TtCore c(static_cast<int>(m.rows()), right);
  Eigen::Map<RowMatrix>(c.data.data(), m.rows(), m.cols()) = m;
  return c;
}

TensorTrain::TensorTrain(std::vector<TtCore> cores) : cores_(std::move(cores)) {
  if (cores_.empty()) throw std::invalid_argument("TensorTrain: need at least one core");
  if (cores_.front().left != 1 || cores_.back().right != 1) throw std::invalid_argument("TensorTrain: boundary ranks must be 1");
  for (std::size_t l = 0; l + 1 < cores_.size(); ++l)
    if (cores_[l].right != cores_[l + 1].left) throw std::invalid_argument("TensorTrain: inconsistent bond dimensions");
  for (const auto& c : cores_)
    if (c.data.size() != static_cast<std::size_t>(c.left) * 2 * static_cast<std::size_t>(c.right))
      throw std::invalid_argument("TensorTrain: core storage size mismatch");
}

TensorTrain TensorTrain::zeros(int n) { return constant(n, 0.0); }

TensorTrain TensorTrain::constant(int n, double value) {
  std::vector<std::array<double, 2>> f(static_cast<std::size_t>(n), {1.0, 1.0});
  if (n < 1) throw std::invalid_argument("TensorTrain: n must be positive");
  f[0] = {value, value};
  return product(f);
}

TensorTrain TensorTrain::product(const std::vector<std::array<double, 2>>& factors) {
  std::vector<TtCore> cores;
  for (const auto& f : factors) {
    TtCore c(1, 1);
    c(0, 0, 0) = f[0];
    c(0, 1, 0) = f[1];
    cores.push_back(std::move(c));
  }
  return TensorTrain(std::move(cores));
}

std::vector<int> TensorTrain::ranks() const {
  std::vector<int> r;
  for (std::size_t l = 0; l + 1 < cores_.size(); ++l) r.push_back(cores_[l].right);
  return r;
}

int TensorTrain::max_rank() const {
  int m = 1;
  for (int r : ranks()) m = std::max(m, r);
  return m;
}

double TensorTrain::entry(std::uint64_t k) const {
  const int n = num_sites();
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
  for (int l = 0; l < n; ++l) {
    const TtCore& c = cores_[static_cast<std::size_t>(l)];
    const int i = static_cast<int>((k >> (n - 1 - l)) & 1u);
    Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(c.right);
    for (int a = 0; a < c.left; ++a) {
      if (v[a] == 0) continue;
      for (int b = 0; b < c.right; ++b) next[b] += v[a] * c(a, i, b);
    }
    v = std::move(next);
  }
  return v[0];
}

Eigen::VectorXd TensorTrain::to_dense() const {
  const int n = num_sites();
  if (n > 26) throw std::invalid_argument("TensorTrain::to_dense: n > 26");
  // Rows index the prefix bits, columns the open bond.
  RowMatrix acc = RowMatrix::Ones(1, 1);
  for (int l = 0; l < n; ++l) {
    const TtCore& c = cores_[static_cast<std::size_t>(l)];
    RowMatrix next(acc.rows() * 2, c.right);
    const Eigen::MatrixXd s0 = slice(c, 0);
    const Eigen::MatrixXd s1 = slice(c, 1);
    const RowMatrix p0 = acc * s0;
    const RowMatrix p1 = acc * s1;
    for (Eigen::Index row = 0; row < acc.rows(); ++row) {
      next.row(2 * row) = p0.row(row);
      next.row(2 * row + 1) = p1.row(row);
    }
    acc = std::move(next);
  }
  return acc.col(0);
}

TtSvdResult tt_svd(const Eigen::VectorXd& v, const Truncation& trunc) {
  const int n = log2_exact(v.size());
  if (n > 26) throw std::invalid_argument("tt_svd: n > 26");
  TtSvdResult out;
  const double delta = trunc.rel_tol * v.norm() / std::sqrt(std::max(1, n - 1));
  std::vector<TtCore> cores;
  std::vector<double> rem(v.data(), v.data() + v.size());
  int r_prev = 1;
  double err2 = 0;
  for (int l = 0; l + 1 < n; ++l) {
    const Eigen::Index rows = static_cast<Eigen::Index>(r_prev) * 2;
    const Eigen::Index cols = static_cast<Eigen::Index>(rem.size()) / rows;
    const Eigen::Map<const RowMatrix> m(rem.data(), rows, cols);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double discarded = 0;
    const int r = choose_rank(svd.singularValues(), trunc, delta, discarded);
    out.discarded.push_back(discarded);
    err2 += discarded * discarded;
    cores.push_back(TtCore::from_left_unfolding(svd.matrixU().leftCols(r), r_prev));
    const RowMatrix next = svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    rem.assign(next.data(), next.data() + next.size());
    r_prev = r;
  }
  TtCore last(r_prev, 1);
  for (int a = 0; a < r_prev; ++a)
    for (int i = 0; i < 2; ++i) last(a, i, 0) = rem[static_cast<std::size_t>(a * 2 + i)];
  cores.push_back(std::move(last));
  out.tt = TensorTrain(std::move(cores));
  out.error_bound = std::sqrt(err2);
  return out;
}

TensorTrain tt_add(const TensorTrain& a, const TensorTrain& b) {
  check_same_sites(a, b);
  const int n = a.num_sites();
  std::vector<TtCore> cores;
  for (int l = 0; l < n; ++l) {
    const TtCore& x = a.core(l);
    const TtCore& y = b.core(l);
    if (n == 1) {
      TtCore c(1, 1);
      for (int i = 0; i < 2; ++i) c(0, i, 0) = x(0, i, 0) + y(0, i, 0);
      cores.push_back(std::move(c));
      continue;
    }
    const bool first = l == 0;
    const bool last = l == n - 1;
    TtCore c(first ? 1 : x.left + y.left, last ? 1 : x.right + y.right);
    const int yl = first ? 0 : x.left;
    const int yr = last ? 0 : x.right;
    for (int i = 0; i < 2; ++i) {
      for (int p = 0; p < x.left; ++p)
        for (int q = 0; q < x.right; ++q) c(p, i, q) = x(p, i, q);
      for (int p = 0; p < y.left; ++p)
        for (int q = 0; q < y.right; ++q) c(yl + p, i, yr + q) = y(p, i, q);
    }
    cores.push_back(std::move(c));
  }
  return TensorTrain(std::move(cores));
}

TensorTrain tt_scale(const TensorTrain& a, double c) {
  TensorTrain out = a;
  for (double& x : out.core(0).data) x *= c;
  return out;
}

TensorTrain tt_hadamard(const TensorTrain& a, const TensorTrain& b) {
  check_same_sites(a, b);
  std::vector<TtCore> cores;
  for (int l = 0; l < a.num_sites(); ++l) {
    const TtCore& x = a.core(l);
    const TtCore& y = b.core(l);
    TtCore c(x.left * y.left, x.right * y.right);
    for (int p = 0; p < x.left; ++p)
      for (int s = 0; s < y.left; ++s)
        for (int i = 0; i < 2; ++i)
          for (int q = 0; q < x.right; ++q)
            for (int t = 0; t < y.right; ++t) c(p * y.left + s, i, q * y.right + t) = x(p, i, q) * y(s, i, t);
    cores.push_back(std::move(c));
  }
  return TensorTrain(std::move(cores));
}

double tt_dot(const TensorTrain& a, const TensorTrain& b) {
  check_same_sites(a, b);
  Eigen::MatrixXd env = Eigen::MatrixXd::Ones(1, 1);
  for (int l = 0; l < a.num_sites(); ++l) {
    const TtCore& x = a.core(l);
    const TtCore& y = b.core(l);
    env = slice(x, 0).transpose() * env * slice(y, 0) + slice(x, 1).transpose() * env * slice(y, 1);
  }
  return env(0, 0);
}

TensorTrain tt_left_orthogonal(const TensorTrain& a) {
  std::vector<TtCore> cores = a.cores();
  for (std::size_t l = 0; l + 1 < cores.size(); ++l) {
    const ThinQr qr = thin_qr(cores[l].left_unfolding());
    cores[l] = TtCore::from_left_unfolding(qr.q, cores[l].left);
    cores[l + 1] = TtCore::from_right_unfolding(qr.r * cores[l + 1].right_unfolding(), cores[l + 1].right);
  }
  return TensorTrain(std::move(cores));
}

TensorTrain tt_right_orthogonal(const TensorTrain& a) {
  std::vector<TtCore> cores = a.cores();
  for (std::size_t l = cores.size() - 1; l >= 1; --l) {
    const ThinQr qr = thin_qr(cores[l].right_unfolding().transpose());
    cores[l] = TtCore::from_right_unfolding(qr.q.transpose(), cores[l].right);
    cores[l - 1] = TtCore::from_left_unfolding(cores[l - 1].left_unfolding() * qr.r.transpose(), cores[l - 1].left);
  }
  return TensorTrain(std::move(cores));
}

double tt_norm(const TensorTrain& a) {
  const TensorTrain o = tt_left_orthogonal(a);
  const auto& d = o.core(o.num_sites() - 1).data;
  return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size())).norm();
}

TtSvdResult tt_round(const TensorTrain& a, const Truncation& trunc) {
  const int n = a.num_sites();
  TensorTrain o = tt_right_orthogonal(a);
  std::vector<TtCore> cores = o.cores();
  const auto& d0 = cores[0].data;
  const double norm = Eigen::Map<const Eigen::VectorXd>(d0.data(), static_cast<Eigen::Index>(d0.size())).norm();
  const double delta = trunc.rel_tol * norm / std::sqrt(std::max(1, n - 1));
  TtSvdResult out;
  double err2 = 0;
  for (int l = 0; l + 1 < n; ++l) {
    auto& c = cores[static_cast<std::size_t>(l)];
    auto& next = cores[static_cast<std::size_t>(l + 1)];
    Eigen::BDCSVD<Eigen::MatrixXd> svd(c.left_unfolding(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    double discarded = 0;
    const int r = choose_rank(svd.singularValues(), trunc, delta, discarded);
    out.discarded.push_back(discarded);
    err2 += discarded * discarded;
    const int left = c.left;
    c = TtCore::from_left_unfolding(svd.matrixU().leftCols(r), left);
    const Eigen::MatrixXd carry = svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).transpose();
    next = TtCore::from_right_unfolding(carry * next.right_unfolding(), next.right);
  }
  out.tt = TensorTrain(std::move(cores));
  out.error_bound = std::sqrt(err2);
  return out;
}

double left_orthogonality_defect(const TensorTrain& a, int upto) {
  double worst = 0;
  for (int l = 0; l < upto; ++l) {
    const Eigen::MatrixXd u = a.core(l).left_unfolding();
    worst = std::max(worst, (u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

double right_orthogonality_defect(const TensorTrain& a, int from) {
  double worst = 0;
  for (int l = from; l < a.num_sites(); ++l) {
    const Eigen::MatrixXd u = a.core(l).right_unfolding();
    worst = std::max(worst, (u * u.transpose() - Eigen::MatrixXd::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace rss
