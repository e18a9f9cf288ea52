#include "fhcs/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

#include "fhcs/bands.hpp"
#include "fhcs/kernels.hpp"

namespace fhcs {
namespace {

double decay(int j, int l) { return std::pow(2.0, -0.5 * std::abs(j - l)); }

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0) || epsilon > std::exp(-1.0) * (1.0 + 1e-15)) {
    throw ParameterError("epsilon must lie in (0, 1/e]");
  }
}

double log_factor(double epsilon, std::size_t n) {
  return -std::log(epsilon) * static_cast<double>(ilog2(n));
}

}  // namespace

// ---------------------------------------------------------------------------
// Coherences

LevelTable local_from_block(const LevelTable& mu_block) {
  const int r = mu_block.r;
  LevelTable mu_local(r);
  for (int j = 0; j < r; ++j) {
    double row_max = 0.0;
    for (int l = 0; l < r; ++l) row_max = std::max(row_max, std::sqrt(mu_block(j, l)));
    for (int l = 0; l < r; ++l) mu_local(j, l) = std::sqrt(mu_block(j, l)) * row_max;
  }
  return mu_local;
}

Coherences local_coherences(const ChangeOfBasisMatrix& u) {
  const auto& levels = u.levels();
  const int r = levels.r();
  LevelTable mu_block(r);
  for (int j = 0; j < r; ++j) {
    const auto& rows = u.band_rows(j);
    for (int l = 0; l < r; ++l) {
      double worst = 0.0;
      for (std::size_t c = levels.begin(l); c < levels.end(l); ++c) {
        for (std::size_t s : rows) worst = std::max(worst, std::norm(u.dense()(s, c)));
      }
      mu_block(j, l) = worst;
    }
  }
  return {mu_block, local_from_block(mu_block)};
}

double coherence_decay_constant(const LevelTable& mu_local) {
  double c = 0.0;
  for (int j = 0; j < mu_local.r; ++j) {
    for (int l = 0; l < mu_local.r; ++l) {
      c = std::max(c, mu_local(j, l) * std::ldexp(1.0, j) / decay(j, l));
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Block norms

namespace {

CVec start_vector(std::size_t cols) {
  // No symmetry in modulus or phase: a constant vector is annihilated by
  // blocks whose bands lie below the translation frequency of the level.
  CVec v(cols);
  for (std::size_t p = 0; p < cols; ++p) {
    const double x = static_cast<double>(p);
    v[p] = std::polar(1.0 + 0.5 * std::cos(1.3 * x), 0.7 * x * x + 0.3);
  }
  kernels::scale(v, 1.0 / kernels::norm(v));
  return v;
}

/// out = B^* (B v)
void gram_apply(const DenseMatrix& b, std::span<const cplx> v, CVec& w, std::span<cplx> out) {
  const std::size_t rows = b.rows, cols = b.cols;
  std::fill(w.begin(), w.end(), cplx{0.0, 0.0});
  for (std::size_t c = 0; c < cols; ++c) {
    const cplx vc = v[c];
    const cplx* col = b.data.data() + c * rows;
    for (std::size_t i = 0; i < rows; ++i) w[i] += col[i] * vc;
  }
  for (std::size_t c = 0; c < cols; ++c) {
    out[c] = kernels::dot(std::span<const cplx>(b.data).subspan(c * rows, rows), w);
  }
}

/// Number of eigenvalues of the symmetric tridiagonal (alpha, beta) below x.
int sturm_count(const RVec& alpha, const RVec& beta, double x) {
  int count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : beta[i - 1] * beta[i - 1];
    d = alpha[i] - x - (i == 0 ? 0.0 : b2 / d);
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++count;
  }
  return count;
}

/// Largest eigenvalue of the tridiagonal and the last component of its unit
/// eigenvector (bisection, then inverse iteration).
std::pair<double, double> top_ritz_pair(const RVec& alpha, const RVec& beta) {
  const std::size_t m = alpha.size();
  double lo = alpha[0], hi = alpha[0];
  for (std::size_t i = 0; i < m; ++i) {
    const double off = (i > 0 ? std::abs(beta[i - 1]) : 0.0) + (i + 1 < m ? std::abs(beta[i]) : 0.0);
    lo = std::min(lo, alpha[i] - off);
    hi = std::max(hi, alpha[i] + off);
  }
  const int target = static_cast<int>(m) - 1;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (sturm_count(alpha, beta, mid) > target ? hi : lo) = mid;
  }
  const double theta = hi;
  if (m == 1) return {theta, 1.0};

  // Inverse iteration on (T - shift I) with Gaussian elimination and partial
  // pivoting on the tridiagonal band.
  const double shift = theta + 1e-13 * std::max(1.0, std::abs(theta));
  RVec x(m, 1.0);
  for (int sweep = 0; sweep < 3; ++sweep) {
    RVec d(m), up(m, 0.0), up2(m, 0.0), lo_(m, 0.0), rhs = x;
    for (std::size_t i = 0; i < m; ++i) {
      d[i] = alpha[i] - shift;
      if (i + 1 < m) {
        up[i] = beta[i];
        lo_[i] = beta[i];
      }
    }
    std::vector<bool> swapped(m, false);
    for (std::size_t i = 0; i + 1 < m; ++i) {
      if (std::abs(lo_[i]) > std::abs(d[i])) {
        swapped[i] = true;
        std::swap(d[i], lo_[i]);
        const double t_up = up[i];
        up[i] = d[i + 1];
        d[i + 1] = t_up;
        up2[i] = i + 2 < m ? up[i + 1] : 0.0;
        if (i + 2 < m) up[i + 1] = 0.0;
        std::swap(rhs[i], rhs[i + 1]);
      }
      if (d[i] == 0.0) d[i] = 1e-300;
      const double f = lo_[i] / d[i];
      d[i + 1] -= f * up[i];
      if (i + 2 < m) up[i + 1] -= f * up2[i];
      rhs[i + 1] -= f * rhs[i];
    }
    if (d[m - 1] == 0.0) d[m - 1] = 1e-300;
    for (std::size_t ii = m; ii-- > 0;) {
      double v = rhs[ii];
      if (ii + 1 < m) v -= up[ii] * x[ii + 1];
      if (ii + 2 < m) v -= up2[ii] * x[ii + 2];
      x[ii] = v / d[ii];
    }
    double nrm = 0.0;
    for (double xi : x) nrm += xi * xi;
    nrm = std::sqrt(nrm);
    for (double& xi : x) xi /= nrm;
  }
  return {theta, x[m - 1]};
}

SpectralNorm lanczos_norm(const DenseMatrix& b, const PowerIterationOptions& opts) {
  const std::size_t cols = b.cols;
  std::vector<CVec> basis;
  basis.push_back(start_vector(cols));
  RVec alpha, beta;
  CVec w(b.rows), g(cols);
  const int steps = static_cast<int>(std::min<std::size_t>(cols, static_cast<std::size_t>(opts.max_iter)));
  double theta = 0.0, residual = 0.0;
  for (int it = 1; it <= steps; ++it) {
    const CVec& v = basis.back();
    gram_apply(b, v, w, g);
    alpha.push_back(kernels::dot(v, g).real());
    // Full reorthogonalization, two passes.
    for (int pass = 0; pass < 2; ++pass) {
      for (const CVec& q : basis) {
        const cplx h = kernels::dot(q, g);
        for (std::size_t i = 0; i < cols; ++i) g[i] -= h * q[i];
      }
    }
    const double beta_next = kernels::norm(g);
    const auto [t, last] = top_ritz_pair(alpha, beta);
    theta = t;
    residual = beta_next * std::abs(last);
    if (theta <= 0.0 && beta_next == 0.0) return {0.0, it, 0.0};
    if (residual <= opts.tol * theta || beta_next <= 1e-15 * std::max(theta, 1e-300) ||
        it == static_cast<int>(cols)) {
      return {std::sqrt(std::max(theta, 0.0)), it, residual};
    }
    beta.push_back(beta_next);
    CVec next(cols);
    for (std::size_t i = 0; i < cols; ++i) next[i] = g[i] / beta_next;
    basis.push_back(std::move(next));
  }
  throw NumericError("Lanczos did not converge in " + std::to_string(opts.max_iter) +
                         " steps (residual " + std::to_string(residual) + ")",
                     residual);
}

SpectralNorm power_norm(const DenseMatrix& b, const PowerIterationOptions& opts) {
  const std::size_t cols = b.cols;
  CVec v = start_vector(cols);
  CVec w(b.rows), next(cols);
  double lambda = 0.0, residual = 0.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    gram_apply(b, v, w, next);
    const double lambda_new = kernels::sq_norm(w);
    residual = 0.0;
    for (std::size_t c = 0; c < cols; ++c) residual += std::norm(next[c] - lambda_new * v[c]);
    residual = std::sqrt(residual);
    const double nrm = kernels::norm(next);
    if (nrm == 0.0) return {0.0, it, 0.0};
    if (it > 1 && std::abs(lambda_new - lambda) <= opts.tol * lambda_new) {
      return {std::sqrt(lambda_new), it, residual};
    }
    lambda = lambda_new;
    for (std::size_t c = 0; c < cols; ++c) v[c] = next[c] / nrm;
  }
  throw NumericError("power iteration did not converge in " + std::to_string(opts.max_iter) +
                         " iterations (residual " + std::to_string(residual) + ")",
                     residual);
}

}  // namespace

SpectralNorm spectral_norm(const DenseMatrix& b, const PowerIterationOptions& opts) {
  if (b.rows == 0 || b.cols == 0) return {};
  return opts.method == SpectralMethod::lanczos ? lanczos_norm(b, opts) : power_norm(b, opts);
}

LevelTable block_norms(const ChangeOfBasisMatrix& u, const PowerIterationOptions& opts) {
  const int r = u.levels().r();
  LevelTable out(r);
  for (int j = 0; j < r; ++j) {
    for (int l = 0; l < r; ++l) out(j, l) = spectral_norm(u.block(j, l), opts).value;
  }
  return out;
}

double block_norm_decay_constant(const LevelTable& block_norm) {
  double c = 0.0;
  for (int j = 0; j < block_norm.r; ++j) {
    for (int l = 0; l < block_norm.r; ++l) c = std::max(c, block_norm(j, l) / decay(j, l));
  }
  return c;
}

// ---------------------------------------------------------------------------
// Relative sparsities

namespace {

double log2_binomial(std::size_t n, std::size_t k) {
  return (std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
          std::lgamma(static_cast<double>(n - k) + 1.0)) /
         std::numbers::ln2;
}

/// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(k);
  for (std::size_t i = 0; i < k; ++i) cur[i] = i;
  while (true) {
    out.push_back(cur);
    std::size_t i = k;
    while (i > 0 && cur[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++cur[i - 1];
    for (std::size_t t = i; t < k; ++t) cur[t] = cur[t - 1] + 1;
  }
  return out;
}

/// Maximizes per-band energy over the phase grid for one support.
class PhaseSearch {
 public:
  PhaseSearch(const ChangeOfBasisMatrix& u, int grid)
      : u_(u), n_(u.n()), r_(u.levels().r()), grid_(grid), roots_(static_cast<std::size_t>(grid)) {
    for (int g = 0; g < grid; ++g) {
      roots_[static_cast<std::size_t>(g)] = std::polar(1.0, 2.0 * std::numbers::pi * g / grid);
    }
    band_of_slot_.resize(n_);
    for (int j = 0; j < r_; ++j) {
      for (std::size_t s : u.band_rows(j)) band_of_slot_[s] = j;
    }
  }

  /// Updates best[j] with the maximum over phase patterns on `support`.
  std::uint64_t run(const std::vector<std::size_t>& support, RVec& best) {
    const std::size_t s = support.size();
    partial_.assign((s + 1) * n_, cplx{0.0, 0.0});
    support_ = &support;
    best_ = &best;
    leaves_ = 0;
    if (s == 0) {
      for (double& b : best) b = std::max(b, 0.0);
      return 0;
    }
    descend(0);
    return leaves_;
  }

 private:
  void descend(std::size_t depth) {
    const std::size_t s = support_->size();
    const cplx* prev = partial_.data() + depth * n_;
    cplx* cur = partial_.data() + (depth + 1) * n_;
    const auto col = u_.column((*support_)[depth]);
    const int choices = depth == 0 ? 1 : grid_;
    for (int g = 0; g < choices; ++g) {
      const cplx phase = roots_[static_cast<std::size_t>(g)];
      for (std::size_t i = 0; i < n_; ++i) cur[i] = prev[i] + phase * col[i];
      if (depth + 1 == s) {
        ++leaves_;
        energy_.assign(static_cast<std::size_t>(r_), 0.0);
        for (std::size_t i = 0; i < n_; ++i) energy_[static_cast<std::size_t>(band_of_slot_[i])] += std::norm(cur[i]);
        for (int j = 0; j < r_; ++j) {
          auto& b = (*best_)[static_cast<std::size_t>(j)];
          b = std::max(b, energy_[static_cast<std::size_t>(j)]);
        }
      } else {
        descend(depth + 1);
      }
    }
  }

  const ChangeOfBasisMatrix& u_;
  std::size_t n_;
  int r_;
  int grid_;
  CVec roots_;
  std::vector<int> band_of_slot_;
  CVec partial_;
  RVec energy_;
  const std::vector<std::size_t>* support_ = nullptr;
  RVec* best_ = nullptr;
  std::uint64_t leaves_ = 0;
};

struct GridResult {
  RVec K;
  std::uint64_t evaluations = 0;
};

GridResult enumerate(const ChangeOfBasisMatrix& u, const std::vector<std::vector<std::size_t>>& supports,
                     int grid, unsigned threads) {
  const int r = u.levels().r();
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(supports.size())));
  std::vector<RVec> partial(threads, RVec(static_cast<std::size_t>(r), 0.0));
  std::vector<std::uint64_t> counts(threads, 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&](unsigned t) {
    PhaseSearch search(u, grid);
    for (std::size_t i = next++; i < supports.size(); i = next++) {
      counts[t] += search.run(supports[i], partial[t]);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  GridResult out{RVec(static_cast<std::size_t>(r), 0.0), 0};
  for (unsigned t = 0; t < threads; ++t) {
    for (int j = 0; j < r; ++j) {
      out.K[static_cast<std::size_t>(j)] = std::max(out.K[static_cast<std::size_t>(j)], partial[t][static_cast<std::size_t>(j)]);
    }
    out.evaluations += counts[t];
  }
  return out;
}

}  // namespace

RelativeSparsityExact relative_sparsity_exact(const ChangeOfBasisMatrix& u, const SparsityPattern& k,
                                              const RelativeSparsityOptions& opts) {
  const auto& levels = u.levels();
  const int r = levels.r();
  if (k.levels() != r) throw ParameterError("sparsity pattern does not match matrix levels");
  if (opts.phase_grid < 1) throw ParameterError("phase grid must be positive");

  const int s = k.total();
  double log2_supports = 0.0;
  for (int l = 0; l < r; ++l) log2_supports += log2_binomial(levels.size(l), static_cast<std::size_t>(k[l]));
  const int finest = opts.refine ? 2 * opts.phase_grid : opts.phase_grid;
  const double log2_work = log2_supports + std::max(0, s - 1) * std::log2(static_cast<double>(finest));
  if (log2_work > opts.log2_work_cap) {
    throw CapacityError("exact relative sparsity needs 2^" + std::to_string(log2_work) +
                        " evaluations, above the cap 2^" + std::to_string(opts.log2_work_cap) +
                        "; use relative_sparsity_bound");
  }

  // Cartesian product of per-level column choices.
  std::vector<std::vector<std::size_t>> supports{{}};
  for (int l = 0; l < r; ++l) {
    const auto choices = combinations(levels.size(l), static_cast<std::size_t>(k[l]));
    std::vector<std::vector<std::size_t>> grown;
    grown.reserve(supports.size() * choices.size());
    for (const auto& base : supports) {
      for (const auto& pick : choices) {
        auto sup = base;
        for (std::size_t p : pick) sup.push_back(levels.begin(l) + p);
        grown.push_back(std::move(sup));
      }
    }
    supports = std::move(grown);
  }

  RelativeSparsityExact out;
  out.phase_grid = opts.phase_grid;
  const GridResult coarse = enumerate(u, supports, opts.phase_grid, opts.threads);
  out.K = coarse.K;
  out.evaluations = coarse.evaluations;
  if (opts.refine) {
    const GridResult fine = enumerate(u, supports, 2 * opts.phase_grid, opts.threads);
    out.K_refined = fine.K;
    out.evaluations += fine.evaluations;
    out.relative_change.resize(out.K.size());
    for (std::size_t j = 0; j < out.K.size(); ++j) {
      out.relative_change[j] = out.K[j] > 0.0 ? std::abs(fine.K[j] - out.K[j]) / out.K[j] : 0.0;
    }
  }
  return out;
}

double geometric_decay_sum(int r, int l) {
  double s = 0.0;
  for (int j = 0; j < r; ++j) s += decay(j, l);
  return s;
}

RelativeSparsityBound relative_sparsity_bound(const LevelTable& block_norm, const SparsityPattern& k) {
  const int r = block_norm.r;
  if (k.levels() != r) throw ParameterError("sparsity pattern does not match table size");
  RelativeSparsityBound out;
  out.block_norm_bound.resize(static_cast<std::size_t>(r));
  out.decay_expression.resize(static_cast<std::size_t>(r));
  out.decay_bound.resize(static_cast<std::size_t>(r));
  const double fit = block_norm_decay_constant(block_norm);
  double max_sum = 0.0;
  for (int l = 0; l < r; ++l) max_sum = std::max(max_sum, geometric_decay_sum(r, l));
  out.decay_constant = fit * fit * max_sum;
  for (int j = 0; j < r; ++j) {
    double root = 0.0, expr = 0.0;
    for (int l = 0; l < r; ++l) {
      root += block_norm(j, l) * std::sqrt(static_cast<double>(k[l]));
      expr += decay(j, l) * k[l];
    }
    out.block_norm_bound[static_cast<std::size_t>(j)] = root * root;
    out.decay_expression[static_cast<std::size_t>(j)] = expr;
    out.decay_bound[static_cast<std::size_t>(j)] = out.decay_constant * expr;
  }
  return out;
}

CoherenceProfile compute_profile(const ChangeOfBasisMatrix& u, const SparsityPattern& k,
                                 const ComputeProfileOptions& opts) {
  CoherenceProfile p;
  p.n = u.n();
  p.k = k.k();
  auto coh = local_coherences(u);
  p.mu_block = std::move(coh.mu_block);
  p.mu_local = std::move(coh.mu_local);
  p.block_norm = block_norms(u, opts.power);
  p.coherence_constant = coherence_decay_constant(p.mu_local);
  p.block_norm_constant = block_norm_decay_constant(p.block_norm);
  if (p.n <= opts.exact_k_max_n) {
    try {
      p.K = relative_sparsity_exact(u, k, opts.sparsity).K;
      p.K_exact = true;
      return p;
    } catch (const CapacityError&) {
      // Dense k at small n: the enumeration is too large, use the bound.
    }
  }
  p.K = relative_sparsity_bound(p.block_norm, k).block_norm_bound;
  p.K_exact = false;
  return p;
}

// ---------------------------------------------------------------------------
// Conditions

ConditionIReport check_condition_i(const CoherenceProfile& profile, const std::vector<int>& budgets,
                                   double epsilon, std::size_t n, double c_test) {
  check_epsilon(epsilon);
  const int r = profile.mu_local.r;
  if (profile.n != n || static_cast<int>(budgets.size()) != r || static_cast<int>(profile.k.size()) != r) {
    throw SizeError("profile, budgets and n are inconsistent");
  }
  const double lf = log_factor(epsilon, n);
  ConditionIReport report;
  report.pass = true;
  for (int j = 0; j < r; ++j) {
    double weighted = 0.0;
    for (int l = 0; l < r; ++l) weighted += profile.mu_local(j, l) * profile.k[static_cast<std::size_t>(l)];
    BandCheck b;
    b.band = j;
    b.budget = budgets[static_cast<std::size_t>(j)];
    b.required = c_test * static_cast<double>(band_size(j)) * weighted * lf;
    b.pass = static_cast<double>(b.budget) >= b.required;
    b.margin = b.required > 0.0 ? b.budget / b.required : kUnboundedMargin;
    report.pass = report.pass && b.pass;
    report.bands.push_back(b);
  }
  return report;
}

namespace {

double ineq_value(const LevelTable& mu_local, const RVec& tilde_k, double kappa, int* worst_l) {
  const int r = mu_local.r;
  double best = 0.0;
  int arg = 0;
  for (int l = 0; l < r; ++l) {
    double sum = 0.0;
    for (int j = 0; j < r; ++j) {
      const double w = static_cast<double>(band_size(j));
      sum += std::max(0.0, w - kappa * tilde_k[static_cast<std::size_t>(j)]) * mu_local(j, l) / kappa;
    }
    if (sum > best) {
      best = sum;
      arg = l;
    }
  }
  if (worst_l) *worst_l = arg;
  return best;
}

std::vector<RVec> extreme_points(const RVec& cap, double total) {
  const int r = static_cast<int>(cap.size());
  std::vector<RVec> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << r); ++mask) {
    RVec v(cap.size(), 0.0);
    double used = 0.0;
    for (int j = 0; j < r; ++j) {
      if (mask >> j & 1U) {
        v[static_cast<std::size_t>(j)] = cap[static_cast<std::size_t>(j)];
        used += cap[static_cast<std::size_t>(j)];
      }
    }
    if (used > total * (1.0 + 1e-12)) continue;
    out.push_back(v);
    const double rest = total - used;
    if (rest <= 0.0) continue;
    for (int j = 0; j < r; ++j) {
      if ((mask >> j & 1U) == 0 && cap[static_cast<std::size_t>(j)] > rest) {
        RVec w = v;
        w[static_cast<std::size_t>(j)] = rest;
        out.push_back(std::move(w));
      }
    }
  }
  return out;
}

std::vector<RVec> grid_points(const RVec& cap, double total) {
  const int r = static_cast<int>(cap.size());
  const int steps = std::max(1, static_cast<int>(std::floor(std::pow(1e6, 1.0 / r))) - 1);
  std::vector<RVec> out;
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  while (true) {
    RVec v(cap.size());
    double sum = 0.0;
    for (int j = 0; j < r; ++j) {
      v[static_cast<std::size_t>(j)] = cap[static_cast<std::size_t>(j)] * idx[static_cast<std::size_t>(j)] / steps;
      sum += v[static_cast<std::size_t>(j)];
    }
    if (sum <= total * (1.0 + 1e-12)) out.push_back(std::move(v));
    int j = 0;
    while (j < r && idx[static_cast<std::size_t>(j)] == steps) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == r) break;
    ++idx[static_cast<std::size_t>(j)];
  }
  return out;
}

}  // namespace

double minimal_kappa(const LevelTable& mu_local, const RVec& tilde_k) {
  auto g = [&](double kappa) { return ineq_value(mu_local, tilde_k, kappa, nullptr); };
  double hi = 1.0;
  int guard = 0;
  while (g(hi) > 1.0 && guard++ < 200) hi *= 2.0;
  double lo = hi;
  guard = 0;
  while (g(lo) <= 1.0 && lo > 1e-300 && guard++ < 2000) lo *= 0.5;
  if (g(lo) <= 1.0) return lo;
  for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

ConditionIIReport check_condition_ii(const CoherenceProfile& profile, const std::vector<int>& budgets,
                                     double epsilon, std::size_t n, double c_test, TildeSearch search) {
  check_epsilon(epsilon);
  const int r = profile.mu_local.r;
  if (profile.n != n || static_cast<int>(budgets.size()) != r || static_cast<int>(profile.K.size()) != r ||
      static_cast<int>(profile.k.size()) != r) {
    throw SizeError("profile, budgets and n are inconsistent");
  }
  ConditionIIReport report;
  report.search = search;
  const double total = std::accumulate(profile.k.begin(), profile.k.end(), 0.0);
  if (total == 0.0) {
    report.pass = true;
    report.vacuous = true;
    report.margin = kUnboundedMargin;
    return report;
  }
  const double lf = log_factor(epsilon, n);
  const auto candidates =
      search == TildeSearch::extreme ? extreme_points(profile.K, total) : grid_points(profile.K, total);
  report.margin = kUnboundedMargin;
  bool first = true;
  for (const RVec& tk : candidates) {
    const double kappa = minimal_kappa(profile.mu_local, tk);
    RVec tm(tk.size());
    std::vector<double> required(tk.size());
    double margin = kUnboundedMargin;
    for (int j = 0; j < r; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      tm[ju] = std::min(static_cast<double>(band_size(j)), kappa * tk[ju]);
      required[ju] = c_test * tm[ju] * lf;
      if (required[ju] > 0.0) margin = std::min(margin, budgets[ju] / required[ju]);
    }
    ++report.candidates_tested;
    report.unit_choice_max = std::max(report.unit_choice_max, ineq_value(profile.mu_local, tk, 1.0, nullptr));
    if (first || margin < report.margin) {
      first = false;
      report.margin = margin;
      report.worst_tilde_k = tk;
      report.worst_tilde_m = tm;
      report.worst_kappa = kappa;
      report.required = required;
      report.worst_ineq_value = ineq_value(profile.mu_local, tk, kappa, &report.worst_l);
    }
  }
  report.pass = report.margin >= 1.0;
  return report;
}

ConditionReport check_conditions(const CoherenceProfile& profile, const std::vector<int>& budgets,
                                 double epsilon, std::size_t n, double c_test, TildeSearch search) {
  ConditionReport report;
  report.condition_i = check_condition_i(profile, budgets, epsilon, n, c_test);
  report.condition_ii = check_condition_ii(profile, budgets, epsilon, n, c_test, search);
  report.pass = report.condition_i.pass && report.condition_ii.pass;
  return report;
}

}  // namespace fhcs
