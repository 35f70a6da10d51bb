#include "rss/clifford.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <stdexcept>

#include "rss/rng.hpp"

namespace rss {
namespace {

using Key = std::vector<long long>;

template <typename Mat>
Mat phase_normalized(const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const Complex v = m(r, c);
      if (std::abs(v) > 1e-9) return m * (std::abs(v) / v);
    }
  }
  throw std::invalid_argument("phase_normalized: zero matrix");
}

template <typename Mat>
Key key_of(const Mat& m) {
  Key key;
  key.reserve(static_cast<std::size_t>(2 * m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      key.push_back(std::llround(m(r, c).real() * 1e9));
      key.push_back(std::llround(m(r, c).imag() * 1e9));
    }
  }
  return key;
}

template <typename Mat>
std::vector<Mat> generate_group(const std::vector<Mat>& generators) {
  std::map<Key, Mat> found;
  std::deque<Mat> frontier;
  const Mat id = Mat::Identity(generators.front().rows(), generators.front().cols());
  found.emplace(key_of(id), id);
  frontier.push_back(id);
  while (!frontier.empty()) {
    const Mat cur = frontier.front();
    frontier.pop_front();
    for (const Mat& g : generators) {
      const Mat next = phase_normalized<Mat>(g * cur);
      if (found.emplace(key_of(next), next).second) frontier.push_back(next);
    }
  }
  // std::map is ordered by key, which is the canonical serialization order.
  std::vector<Mat> out;
  out.reserve(found.size());
  for (auto& [key, m] : found) out.push_back(m);
  return out;
}

const Eigen::Matrix2cd& pauli_matrix(Pauli p) {
  static const std::array<Eigen::Matrix2cd, 4> mats = [] {
    std::array<Eigen::Matrix2cd, 4> m;
    m[0] << 1, 0, 0, 1;
    m[1] << 0, 1, 1, 0;
    m[2] << 0, Complex(0, -1), Complex(0, 1), 0;
    m[3] << 1, 0, 0, -1;
    return m;
  }();
  return mats[static_cast<int>(p)];
}

}  // namespace

const std::vector<SingleQubitClifford>& single_qubit_cliffords() {
  static const std::vector<SingleQubitClifford> table = [] {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd h, ph;
    h << s, s, s, -s;
    ph << 1, 0, 0, Complex(0, 1);
    const auto mats = generate_group<Eigen::Matrix2cd>({h, ph});
    if (mats.size() != 24) throw std::logic_error("single-qubit Clifford group must have 24 elements");
    std::vector<SingleQubitClifford> out;
    for (const auto& u : mats) {
      SingleQubitClifford c{u, {}, {}};
      for (int p = 0; p < 4; ++p) {
        const Eigen::Matrix2cd conj = u * pauli_matrix(static_cast<Pauli>(p)) * u.adjoint();
        bool matched = false;
        for (int q = 0; q < 4 && !matched; ++q) {
          for (int sign : {1, -1}) {
            if ((conj - static_cast<double>(sign) * pauli_matrix(static_cast<Pauli>(q))).cwiseAbs().maxCoeff() < 1e-9) {
              c.image[static_cast<std::size_t>(p)] = static_cast<Pauli>(q);
              c.sign[static_cast<std::size_t>(p)] = sign;
              matched = true;
              break;
            }
          }
        }
        if (!matched) throw std::logic_error("Clifford does not map Paulis to Paulis");
      }
      out.push_back(c);
    }
    return out;
  }();
  return table;
}

int find_single_qubit_clifford(const Eigen::Matrix2cd& u, double tol) {
  const auto& table = single_qubit_cliffords();
  for (std::size_t i = 0; i < table.size(); ++i) {
    // |Tr(C^dagger U)| = 2 iff equal up to phase, for unitary U.
    if (std::abs(std::abs((table[i].matrix.adjoint() * u).trace()) - 2.0) < tol) return static_cast<int>(i);
  }
  return -1;
}

const std::vector<Eigen::Matrix4cd>& two_qubit_cliffords() {
  static const std::vector<Eigen::Matrix4cd> table = [] {
    const double s = 1.0 / std::sqrt(2.0);
    Eigen::Matrix2cd h, ph, id;
    h << s, s, s, -s;
    ph << 1, 0, 0, Complex(0, 1);
    id.setIdentity();
    auto kron = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
      Eigen::Matrix4cd k;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) k.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
      return k;
    };
    Eigen::Matrix4cd cnot = Eigen::Matrix4cd::Zero();
    cnot(0, 0) = cnot(1, 1) = cnot(2, 3) = cnot(3, 2) = 1;
    auto mats = generate_group<Eigen::Matrix4cd>({kron(h, id), kron(id, h), kron(ph, id), kron(id, ph), cnot});
    if (mats.size() != 11520) throw std::logic_error("two-qubit Clifford group must have 11520 elements");
    return mats;
  }();
  return table;
}

Eigen::Matrix2cd haar_unitary_2x2(Rng& rng) {
  // (a, b) uniform on the unit 3-sphere plus an independent global phase.
  double v[4];
  double norm = 0;
  do {
    norm = 0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm < 1e-300);
  norm = std::sqrt(norm);
  const Complex a(v[0] / norm, v[1] / norm);
  const Complex b(v[2] / norm, v[3] / norm);
  const Complex phase = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
  Eigen::Matrix2cd u;
  u << a, -std::conj(b), b, std::conj(a);
  return phase * u;
}

bool is_unitary(const Eigen::MatrixXcd& u, double tol) {
  if (u.rows() != u.cols()) return false;
  const Eigen::MatrixXcd diff = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
  return diff.cwiseAbs().maxCoeff() < tol;
}

}  // namespace rss
