#include "rss/mpo.hpp"

#include <algorithm>
#include <stdexcept>

namespace rss {
namespace {

MpoCore identity_core() {
  MpoCore c(1, 1);
  c(0, 0, 0, 0) = 1;
  c(0, 1, 1, 0) = 1;
  return c;
}

// Core of the control qubit: projector |i><i| selected by bond value i.
void set_control(MpoCore& c, bool bond_on_left) {
  for (int i = 0; i < 2; ++i) {
    if (bond_on_left)
      c(i, i, i, 0) = 1;
    else
      c(0, i, i, i) = 1;
  }
}

// Core of the target qubit: X^i selected by bond value i.
void set_target(MpoCore& c, bool bond_on_left) {
  for (int i = 0; i < 2; ++i) {
    for (int x = 0; x < 2; ++x) {
      const int out = i ? 1 - x : x;
      if (bond_on_left)
        c(i, out, x, 0) = 1;
      else
        c(0, out, x, i) = 1;
    }
  }
}

}  // namespace

Mpo::Mpo(std::vector<MpoCore> cores, bool periodic) : cores_(std::move(cores)), periodic_(periodic) {
  if (cores_.empty()) throw std::invalid_argument("Mpo: no sites");
  for (std::size_t l = 0; l + 1 < cores_.size(); ++l)
    if (cores_[l].bond_out != cores_[l + 1].bond_in) throw std::invalid_argument("Mpo: bond mismatch");
  if (periodic_) {
    if (cores_.front().bond_in != cores_.back().bond_out) throw std::invalid_argument("Mpo: boundary bond mismatch");
  } else if (cores_.front().bond_in != 1 || cores_.back().bond_out != 1) {
    throw std::invalid_argument("Mpo: open boundary bonds must be 1");
  }
}

Mpo Mpo::identity(int n) {
  if (n < 1) throw std::invalid_argument("Mpo::identity: n < 1");
  return Mpo(std::vector<MpoCore>(static_cast<std::size_t>(n), identity_core()), false);
}

int Mpo::max_bond() const {
  int m = 1;
  for (const auto& c : cores_) m = std::max({m, c.bond_in, c.bond_out});
  return m;
}

Mpo Mpo::times(const Mpo& other) const {
  if (other.num_sites() != num_sites()) throw std::invalid_argument("Mpo::times: size mismatch");
  std::vector<MpoCore> out;
  for (int l = 0; l < num_sites(); ++l) {
    const MpoCore& a = core(l);
    const MpoCore& b = other.core(l);
    MpoCore c(a.bond_in * b.bond_in, a.bond_out * b.bond_out);
    for (int al = 0; al < a.bond_in; ++al)
      for (int bl = 0; bl < b.bond_in; ++bl)
        for (int ar = 0; ar < a.bond_out; ++ar)
          for (int br = 0; br < b.bond_out; ++br)
            for (int o = 0; o < 2; ++o)
              for (int i = 0; i < 2; ++i) {
                Complex acc = 0;
                for (int m = 0; m < 2; ++m) acc += a(al, o, m, ar) * b(bl, m, i, br);
                c(al * b.bond_in + bl, o, i, ar * b.bond_out + br) = acc;
              }
    out.push_back(std::move(c));
  }
  return Mpo(std::move(out), periodic_ || other.periodic_);
}

Mpo Mpo::to_open() const {
  if (!periodic_) return *this;
  const int beta = cores_.front().bond_in;
  const int n = num_sites();
  std::vector<MpoCore> out;
  for (int l = 0; l < n; ++l) {
    const MpoCore& w = core(l);
    const int left = l == 0 ? 1 : beta * w.bond_in;
    const int right = l == n - 1 ? 1 : beta * w.bond_out;
    MpoCore c(left, right);
    for (int bt = 0; bt < beta; ++bt)
      for (int a = 0; a < w.bond_in; ++a)
        for (int b = 0; b < w.bond_out; ++b)
          for (int o = 0; o < 2; ++o)
            for (int i = 0; i < 2; ++i) {
              const Complex v = w(a, o, i, b);
              if (v == Complex(0)) continue;
              if (n == 1) {
                if (a == b) c(0, o, i, 0) += v;
              } else if (l == 0) {
                // The boundary index enters as `a`; carry it to the right.
                if (a == bt) c(0, o, i, bt * w.bond_out + b) = v;
              } else if (l == n - 1) {
                if (b == bt) c(bt * w.bond_in + a, o, i, 0) = v;
              } else {
                c(bt * w.bond_in + a, o, i, bt * w.bond_out + b) = v;
              }
            }
    out.push_back(std::move(c));
  }
  return Mpo(std::move(out), false);
}

Eigen::MatrixXcd Mpo::to_dense() const {
  const int n = num_sites();
  if (n > 12) throw std::invalid_argument("Mpo::to_dense: n > 12");
  const Mpo open = to_open();
  const std::uint64_t dim = std::uint64_t{1} << n;
  Eigen::MatrixXcd out(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<Complex> vec, next;
  for (std::uint64_t row = 0; row < dim; ++row) {
    for (std::uint64_t col = 0; col < dim; ++col) {
      vec.assign(1, 1.0);
      for (int l = 0; l < n; ++l) {
        const MpoCore& c = open.core(l);
        const int o = static_cast<int>((row >> (n - 1 - l)) & 1u);
        const int i = static_cast<int>((col >> (n - 1 - l)) & 1u);
        next.assign(static_cast<std::size_t>(c.bond_out), 0.0);
        for (int a = 0; a < c.bond_in; ++a) {
          if (vec[static_cast<std::size_t>(a)] == Complex(0)) continue;
          for (int b = 0; b < c.bond_out; ++b) next[static_cast<std::size_t>(b)] += vec[static_cast<std::size_t>(a)] * c(a, o, i, b);
        }
        vec.swap(next);
      }
      out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = vec[0];
    }
  }
  return out;
}

Mpo cnot_mpo(int n, const EntanglingPair& pair, bool wrap) {
  if (pair.control < 0 || pair.control >= n || pair.target < 0 || pair.target >= n || pair.control == pair.target)
    throw std::invalid_argument("cnot_mpo: invalid pair");
  std::vector<MpoCore> cores(static_cast<std::size_t>(n), identity_core());
  const int lo = std::min(pair.control, pair.target);
  const int hi = std::max(pair.control, pair.target);
  if (wrap) {
    if (lo != 0 || hi != n - 1) throw std::invalid_argument("cnot_mpo: wrap gate must span the chain ends");
    // Bond leaves site n-1 to the right and re-enters site 0 from the left.
    MpoCore first(2, 1), last(1, 2);
    if (pair.control == 0) {
      set_control(first, true);
      set_target(last, false);
    } else {
      set_target(first, true);
      set_control(last, false);
    }
    cores.front() = std::move(first);
    cores.back() = std::move(last);
    return Mpo(std::move(cores), true);
  }
  MpoCore left(1, 2), right(2, 1);
  if (pair.control == lo) {
    set_control(left, false);
    set_target(right, true);
  } else {
    set_target(left, false);
    set_control(right, true);
  }
  cores[static_cast<std::size_t>(lo)] = std::move(left);
  cores[static_cast<std::size_t>(hi)] = std::move(right);
  for (int l = lo + 1; l < hi; ++l) {
    MpoCore pass(2, 2);
    for (int b = 0; b < 2; ++b)
      for (int x = 0; x < 2; ++x) pass(b, x, x, b) = 1;
    cores[static_cast<std::size_t>(l)] = std::move(pass);
  }
  return Mpo(std::move(cores), false);
}

Mpo cnot_layer_mpo(const Topology& topology, int pattern_index) {
  Mpo layer = Mpo::identity(topology.num_qubits());
  for (const auto& p : topology.pattern(pattern_index)) layer = cnot_mpo(topology.num_qubits(), p, topology.is_wrap(p)).times(layer);
  return layer;
}

}  // namespace rss
