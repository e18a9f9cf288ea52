#pragma once

// Test-side reference computations. These are written directly from the
// definitions (Haar atoms, DFT sum, exhaustive enumeration) and share no code
// with the library beyond the complex type.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

inline int log2_exact(std::size_t n) {
  int r = 0;
  while ((std::size_t{1} << r) < n) ++r;
  return r;
}

// Value of the Haar atom with coefficient index `idx` at time t, for n = 2^r.
// idx 0 is psi; idx = 2^j + p (j >= 1) and idx = 1 (j = 0, p = 0) are phi_{j,p}.
inline double haar_atom(std::size_t n, std::size_t idx, std::size_t t) {
  const int r = log2_exact(n);
  if (idx == 0) return std::pow(2.0, -r / 2.0);
  int j = 0;
  std::size_t p = 0;
  if (idx >= 2) {
    j = log2_exact(idx + 1) - 1;
    while ((std::size_t{1} << (j + 1)) <= idx) ++j;
    p = idx - (std::size_t{1} << j);
  }
  const double width = std::pow(2.0, r - j);
  const double amp = std::pow(2.0, (j - r) / 2.0);
  const double tt = static_cast<double>(t);
  const double start = static_cast<double>(p) * width;
  if (tt >= start && tt < start + 0.5 * width) return amp;
  if (tt >= start + 0.5 * width && tt < start + width) return -amp;
  return 0.0;
}

// Phi as a dense row-major n x n matrix with the atoms as columns.
inline std::vector<std::vector<double>> haar_matrix(std::size_t n) {
  std::vector<std::vector<double>> phi(n, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t)
    for (std::size_t i = 0; i < n; ++i) phi[t][i] = haar_atom(n, i, t);
  return phi;
}

// n^{-1/2} sum_t x(t) e^{2 pi i omega t / n}, evaluated term by term.
inline cplx dft_sum(const CVec& x, int omega) {
  const double n = static_cast<double>(x.size());
  cplx acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double angle = 2.0 * std::numbers::pi * omega * static_cast<double>(t) / n;
    acc += x[t] * cplx(std::cos(angle), std::sin(angle));
  }
  return acc / std::sqrt(n);
}

// U entry (omega, i) = (F phi_i)(omega) by direct summation.
inline cplx u_entry(std::size_t n, int omega, std::size_t i) {
  CVec atom(n);
  for (std::size_t t = 0; t < n; ++t) atom[t] = haar_atom(n, i, t);
  return dft_sum(atom, omega);
}

// Level and band index sets (0-based coefficient indices, frequencies).
inline std::vector<std::size_t> level_indices(int j) {
  std::vector<std::size_t> out;
  const std::size_t lo = j == 0 ? 0 : std::size_t{1} << j;
  const std::size_t hi = std::size_t{1} << (j + 1);
  for (std::size_t i = lo; i < hi; ++i) out.push_back(i);
  return out;
}

inline std::vector<int> band(int j) {
  if (j == 0) return {0, 1};
  std::vector<int> out;
  for (int w = -(1 << j) + 1; w <= -(1 << (j - 1)); ++w) out.push_back(w);
  for (int w = (1 << (j - 1)) + 1; w <= (1 << j); ++w) out.push_back(w);
  return out;
}

// All subsets of size k of `items`, visited through `fn`.
template <class T>
void for_each_subset(const std::vector<T>& items, std::size_t k, const std::function<void(const std::vector<T>&)>& fn) {
  std::vector<T> cur;
  std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (cur.size() == k) {
      fn(cur);
      return;
    }
    for (std::size_t i = start; i < items.size(); ++i) {
      cur.push_back(items[i]);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
}

// min over level-respecting supports S with |S cap level j| = k_j of
// sum_{i not in S} |c_i|.
inline double sigma_exhaustive(const CVec& c, const std::vector<int>& k) {
  const int r = static_cast<int>(k.size());
  double best = 1e300;
  std::vector<std::vector<std::vector<std::size_t>>> choices(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) {
    for_each_subset<std::size_t>(level_indices(j), static_cast<std::size_t>(k[static_cast<std::size_t>(j)]),
                                 [&](const std::vector<std::size_t>& s) { choices[static_cast<std::size_t>(j)].push_back(s); });
  }
  std::vector<std::size_t> pick(static_cast<std::size_t>(r), 0);
  while (true) {
    std::vector<bool> keep(c.size(), false);
    for (int j = 0; j < r; ++j)
      for (std::size_t i : choices[static_cast<std::size_t>(j)][pick[static_cast<std::size_t>(j)]]) keep[i] = true;
    double dropped = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (!keep[i]) dropped += std::abs(c[i]);
    best = std::min(best, dropped);
    int j = 0;
    while (j < r && ++pick[static_cast<std::size_t>(j)] == choices[static_cast<std::size_t>(j)].size()) pick[static_cast<std::size_t>(j++)] = 0;
    if (j == r) break;
  }
  return best;
}

inline CVec random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  CVec v(n);
  for (auto& z : v) z = cplx(g(gen), g(gen));
  return v;
}


// Dense row-major matrix.
using Dense = std::vector<CVec>;

// Rows P_Omega U by direct summation, omega in the given order.
inline Dense dense_A(std::size_t n, const std::vector<int>& omega) {
  Dense a(omega.size(), CVec(n));
  for (std::size_t q = 0; q < omega.size(); ++q)
    for (std::size_t i = 0; i < n; ++i) a[q][i] = u_entry(n, omega[q], i);
  return a;
}

inline CVec matvec(const Dense& a, const CVec& c) {
  CVec y(a.size());
  for (std::size_t q = 0; q < a.size(); ++q)
    for (std::size_t i = 0; i < c.size(); ++i) y[q] += a[q][i] * c[i];
  return y;
}

inline CVec matvec_adjoint(const Dense& a, const CVec& y, std::size_t n) {
  CVec c(n);
  for (std::size_t q = 0; q < a.size(); ++q)
    for (std::size_t i = 0; i < n; ++i) c[i] += std::conj(a[q][i]) * y[q];
  return c;
}

inline double l2(const CVec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

inline double l1(const CVec& v) {
  double s = 0.0;
  for (const auto& z : v) s += std::abs(z);
  return s;
}

// Projected subgradient for min ||c||_1 s.t. ||A c - y|| <= eta, assuming
// A A^* = I so the projection is c - A^*(r - eta r / ||r||). Geometric step
// decay s_k = s0 q^k along the normalized subgradient; returns the best
// (feasible) iterate seen.
struct SubgradientResult {
  CVec c;
  double objective = 0.0;
};

inline SubgradientResult subgradient_qcbp(const Dense& a, const CVec& y, double eta, std::size_t n,
                                          int iterations = 1000000, double s0 = 0.05, double q = 1.0 - 2.5e-5) {
  auto project = [&](CVec& c) {
    CVec r = matvec(a, c);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= y[k];
    const double len = l2(r);
    if (len <= eta) return;
    for (auto& z : r) z *= 1.0 - eta / len;
    const CVec step = matvec_adjoint(a, r, n);
    for (std::size_t i = 0; i < n; ++i) c[i] -= step[i];
  };
  CVec c = matvec_adjoint(a, y, n);
  project(c);
  SubgradientResult best{c, l1(c)};
  double step = s0;
  CVec g(n);
  for (int it = 0; it < iterations; ++it, step *= q) {
    double gn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(c[i]);
      g[i] = mag > 0.0 ? c[i] / mag : cplx(0.0);
      gn += std::norm(g[i]);
    }
    if (gn == 0.0) break;
    gn = std::sqrt(gn);
    for (std::size_t i = 0; i < n; ++i) c[i] -= step / gn * g[i];
    project(c);
    const double obj = l1(c);
    if (obj < best.objective) {
      best.c = c;
      best.objective = obj;
    }
  }
  return best;
}

// K_j by enumeration: every support with exactly k_l entries in level l and
// every phase pattern on a `grid`-point circle (first phase fixed).
inline std::vector<double> relative_sparsity_brute(std::size_t n, const std::vector<int>& k, int grid) {
  const int r = log2_exact(n);
  std::vector<std::vector<CVec>> rows(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j)
    for (int w : band(j)) {
      CVec row(n);
      for (std::size_t i = 0; i < n; ++i) row[i] = u_entry(n, w, i);
      rows[static_cast<std::size_t>(j)].push_back(row);
    }
  std::vector<std::vector<std::vector<std::size_t>>> per_level(static_cast<std::size_t>(r));
  for (int l = 0; l < r; ++l)
    for_each_subset<std::size_t>(level_indices(l), static_cast<std::size_t>(k[static_cast<std::size_t>(l)]),
                                 [&](const std::vector<std::size_t>& s) { per_level[static_cast<std::size_t>(l)].push_back(s); });
  std::vector<double> K(static_cast<std::size_t>(r), 0.0);
  std::vector<std::size_t> pick(static_cast<std::size_t>(r), 0);
  while (true) {
    std::vector<std::size_t> support;
    for (int l = 0; l < r; ++l)
      for (std::size_t i : per_level[static_cast<std::size_t>(l)][pick[static_cast<std::size_t>(l)]]) support.push_back(i);
    const std::size_t s = support.size();
    std::vector<int> ph(s, 0);
    while (s > 0) {
      CVec z(n);
      for (std::size_t t = 0; t < s; ++t)
        z[support[t]] = std::polar(1.0, 2.0 * std::numbers::pi * ph[t] / grid);
      for (int j = 0; j < r; ++j) {
        double val = 0.0;
        for (const CVec& row : rows[static_cast<std::size_t>(j)]) {
          cplx acc = 0.0;
          for (std::size_t t = 0; t < s; ++t) acc += row[support[t]] * z[support[t]];
          val += std::norm(acc);
        }
        K[static_cast<std::size_t>(j)] = std::max(K[static_cast<std::size_t>(j)], val);
      }
      std::size_t t = 1;
      while (t < s && ++ph[t] == grid) ph[t++] = 0;
      if (t >= s) break;
    }
    int l = 0;
    while (l < r && ++pick[static_cast<std::size_t>(l)] == per_level[static_cast<std::size_t>(l)].size()) pick[static_cast<std::size_t>(l++)] = 0;
    if (l == r) break;
  }
  return K;
}

}  // namespace oracle
