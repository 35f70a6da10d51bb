#include "rss/mals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rss/pauli.hpp"
#include "rss/rng.hpp"

namespace rss {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd slice(const TtCore& c, int i) {
  Eigen::MatrixXd m(c.left, c.right);
  for (int a = 0; a < c.left; ++a)
    for (int b = 0; b < c.right; ++b) m(a, b) = c(a, i, b);
  return m;
}

Eigen::MatrixXd left_step(const Eigen::MatrixXd& env, const TtCore& x, const TtCore& y) {
  return slice(x, 0).transpose() * env * slice(y, 0) + slice(x, 1).transpose() * env * slice(y, 1);
}

Eigen::MatrixXd right_step(const Eigen::MatrixXd& env, const TtCore& x, const TtCore& y) {
  return slice(x, 0) * env * slice(y, 0).transpose() + slice(x, 1) * env * slice(y, 1).transpose();
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& g, double cutoff) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (g + g.transpose()));
  const double top = eig.eigenvalues().cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(g.rows());
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    if (std::abs(eig.eigenvalues()[i]) > cutoff * top) inv[i] = 1.0 / eig.eigenvalues()[i];
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

class Sweeper {
 public:
  Sweeper(const TensorTrain& target, TensorTrain x, const MalsOptions& opt)
      : t_(target), cores_(tt_right_orthogonal(x).cores()), opt_(opt), n_(target.num_sites()) {}

  void sweep() {
    // Environments to the right of each bond, from scratch.
    std::vector<Eigen::MatrixXd> rt(static_cast<std::size_t>(n_ + 1)), rx(static_cast<std::size_t>(n_ + 1));
    rt[static_cast<std::size_t>(n_)] = Eigen::MatrixXd::Ones(1, 1);
    rx[static_cast<std::size_t>(n_)] = Eigen::MatrixXd::Ones(1, 1);
    for (int m = n_ - 1; m >= 1; --m) {
      rt[idx(m)] = right_step(rt[idx(m + 1)], cores_[idx(m)], t_.core(m));
      rx[idx(m)] = right_step(rx[idx(m + 1)], cores_[idx(m)], cores_[idx(m)]);
    }
    std::vector<Eigen::MatrixXd> lt(static_cast<std::size_t>(n_ + 1)), lx(static_cast<std::size_t>(n_ + 1));
    lt[0] = Eigen::MatrixXd::Ones(1, 1);
    lx[0] = Eigen::MatrixXd::Ones(1, 1);
    for (int l = 0; l + 1 < n_; ++l) {
      update(l, lt[idx(l)], lx[idx(l)], rt[idx(l + 2)], rx[idx(l + 2)], true);
      lt[idx(l + 1)] = left_step(lt[idx(l)], cores_[idx(l)], t_.core(l));
      lx[idx(l + 1)] = left_step(lx[idx(l)], cores_[idx(l)], cores_[idx(l)]);
    }
    for (int l = n_ - 2; l >= 0; --l) {
      update(l, lt[idx(l)], lx[idx(l)], rt[idx(l + 2)], rx[idx(l + 2)], false);
      rt[idx(l + 1)] = right_step(rt[idx(l + 2)], cores_[idx(l + 1)], t_.core(l + 1));
      rx[idx(l + 1)] = right_step(rx[idx(l + 2)], cores_[idx(l + 1)], cores_[idx(l + 1)]);
    }
  }

  TensorTrain current() const { return TensorTrain(cores_); }

 private:
  static std::size_t idx(int i) { return static_cast<std::size_t>(i); }

  void update(int l, const Eigen::MatrixXd& lt, const Eigen::MatrixXd& lx, const Eigen::MatrixXd& rt,
              const Eigen::MatrixXd& rx, bool left_to_right) {
    const TtCore& t0 = t_.core(l);
    const TtCore& t1 = t_.core(l + 1);
    const int a = static_cast<int>(lt.rows());
    const int b = static_cast<int>(rt.rows());
    // Projection of the target onto the two-site frame, shape (a*2) x (2*b).
    RowMatrix step1 = lt * t0.right_unfolding();                  // a x (2 * g)
    Eigen::Map<RowMatrix> s1(step1.data(), static_cast<Eigen::Index>(a) * 2, t0.right);
    RowMatrix step2 = s1 * t1.right_unfolding();                  // (a*2) x (2 * beta)
    Eigen::Map<RowMatrix> s2(step2.data(), static_cast<Eigen::Index>(a) * 4, t1.right);
    RowMatrix step3 = s2 * rt.transpose();                        // (a*4) x b
    Eigen::Map<RowMatrix> w(step3.data(), static_cast<Eigen::Index>(a) * 2, static_cast<Eigen::Index>(b) * 2);
    RowMatrix sol = w;
    // Least-squares solution with the (nearly identity) frame Gram matrices.
    const Eigen::MatrixXd gl = pinv(lx, opt_.pinv_cutoff);
    const Eigen::MatrixXd gr = pinv(rx, opt_.pinv_cutoff);
    for (int i = 0; i < 2; ++i) {
      RowMatrix block(a, 2 * b);
      for (int p = 0; p < a; ++p) block.row(p) = sol.row(p * 2 + i);
      block = gl * block;
      for (int p = 0; p < a; ++p) sol.row(p * 2 + i) = block.row(p);
    }
    for (int j = 0; j < 2; ++j) sol.middleCols(static_cast<Eigen::Index>(j) * b, b) = sol.middleCols(static_cast<Eigen::Index>(j) * b, b) * gr;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(sol), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    int r = 1;
    const double top = s.size() > 0 ? s[0] : 0.0;
    while (r < s.size() && r < opt_.max_rank && s[r] > opt_.rel_cutoff * top && s[r] > opt_.abs_cutoff) ++r;
    const Eigen::MatrixXd u = svd.matrixU().leftCols(r);
    const Eigen::MatrixXd vt = svd.matrixV().leftCols(r).transpose();
    const Eigen::VectorXd sr = s.head(r);
    if (left_to_right) {
      cores_[idx(l)] = TtCore::from_left_unfolding(u, a);
      cores_[idx(l + 1)] = TtCore::from_right_unfolding(sr.asDiagonal() * vt, b);
    } else {
      cores_[idx(l)] = TtCore::from_left_unfolding(u * sr.asDiagonal(), a);
      cores_[idx(l + 1)] = TtCore::from_right_unfolding(vt, b);
    }
  }

  const TensorTrain& t_;
  std::vector<TtCore> cores_;
  MalsOptions opt_;
  int n_;
};

double distance(const TensorTrain& a, const TensorTrain& b) { return tt_norm(tt_add(a, tt_scale(b, -1.0))); }

}  // namespace

MalsResult mals_fit(const TensorTrain& target, const TensorTrain& init, const MalsOptions& opt) {
  if (init.num_sites() != target.num_sites()) throw std::invalid_argument("mals_fit: init has the wrong site count");
  if (opt.max_rank < 1) throw std::invalid_argument("mals_fit: max_rank must be positive");
  MalsResult out;
  const double tnorm = tt_norm(target);
  auto relative = [&](double r) { return tnorm > 0 ? r / tnorm : r; };
  if (target.num_sites() == 1) {
    out.tt = target;
    out.residual_history = {distance(target, init), 0.0};
    out.converged = true;
    out.sweeps = 1;
    return out;
  }
  TensorTrain best = tt_round(init, Truncation{opt.max_rank, 0.0, 0.0}).tt;
  double best_res = distance(target, best);
  out.residual_history.push_back(best_res);
  Sweeper sweeper(target, best, opt);
  for (int s = 1; s <= opt.max_sweeps; ++s) {
    sweeper.sweep();
    const TensorTrain x = sweeper.current();
    const double res = distance(target, x);
    out.residual_history.push_back(res);
    out.sweeps = s;
    const double prev = best_res;
    if (res <= best_res) {
      best = x;
      best_res = res;
    }
    if (relative(res) < 1e-14 || prev - res <= opt.tol * std::max(prev, 1e-300)) {
      out.converged = true;
      break;
    }
  }
  out.tt = best;
  out.residual = best_res;
  out.relative_residual = relative(best_res);
  return out;
}

MalsResult mals_fit(const Eigen::VectorXd& target, const TensorTrain& init, const MalsOptions& opt) {
  if (target.size() > (Eigen::Index{1} << 20)) throw std::invalid_argument("mals_fit: dense target larger than 2^20");
  return mals_fit(tt_svd(target).tt, init, opt);
}

InverseFit tt_elementwise_inverse_fit(const TensorTrain& f, int max_rank, double guard, int probes,
                                      std::uint64_t probe_seed) {
  const int n = f.num_sites();
  if (n > 20) throw std::invalid_argument("tt_elementwise_inverse_fit: only the dense path (n <= 20) is available");
  const Eigen::VectorXd fd = f.to_dense();
  Eigen::VectorXd g(fd.size());
  for (Eigen::Index k = 0; k < fd.size(); ++k) {
    if (!(std::abs(fd[k]) >= guard))
      throw std::domain_error("tt_elementwise_inverse_fit: |f_k| below the guard at k = " +
                              bitstring(static_cast<std::uint64_t>(k), n));
    g[k] = 1.0 / fd[k];
  }
  InverseFit out;
  const TensorTrain exact = tt_svd(g).tt;
  const TensorTrain init = tt_round(exact, Truncation{max_rank, 0.0, 0.0}).tt;
  MalsOptions opt;
  opt.max_rank = max_rank;
  out.fit = mals_fit(exact, init, opt);
  out.tt = out.fit.tt;
  const std::uint64_t dim = std::uint64_t{1} << n;
  Rng rng(probe_seed);
  const bool all = dim <= static_cast<std::uint64_t>(std::max(probes, 0));
  out.probes = all ? static_cast<int>(dim) : probes;
  for (int p = 0; p < out.probes; ++p) {
    const std::uint64_t k = all ? static_cast<std::uint64_t>(p) : rng.below(dim);
    out.probe_error = std::max(out.probe_error, std::abs(out.tt.entry(k) * fd[static_cast<Eigen::Index>(k)] - 1.0));
  }
  return out;
}

}  // namespace rss
