#include "fhcs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "fhcs/haar.hpp"
#include "fhcs/kernels.hpp"
#include "fhcs/rng.hpp"

namespace fhcs {

RecoveryProblem::RecoveryProblem(std::shared_ptr<const MeasurementOperator> a, CVec measurements,
                                 double noise)
    : op(std::move(a)), y(std::move(measurements)), eta(noise) {
  if (!op) throw ParameterError("recovery problem needs a measurement operator");
  if (y.size() != op->m()) {
    throw SizeError("measurement vector has length " + std::to_string(y.size()) + ", operator has m = " +
                    std::to_string(op->m()));
  }
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be finite and nonnegative");
}

namespace {

double re_dot(std::span<const cplx> a, std::span<const cplx> b) { return kernels::dot(a, b).real(); }

}  // namespace

Certificate residual_certificate(const RecoveryProblem& problem, std::span<const cplx> c,
                                 std::span<const cplx> dual) {
  const auto& op = *problem.op;
  if (c.size() != op.n() || dual.size() != op.m()) throw SizeError("certificate operands do not match the operator");
  Certificate cert;

  CVec r = op.forward(c);
  kernels::axpby(1.0, problem.y, -1.0, r, r);
  cert.residual_norm = kernels::norm(r);
  cert.feasibility_surplus = std::max(0.0, cert.residual_norm - problem.eta);

  CVec u = op.adjoint(dual);
  kernels::scale(u, -1.0);
  double u_inf = 0.0, c_inf = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    u_inf = std::max(u_inf, std::abs(u[i]));
    c_inf = std::max(c_inf, std::abs(c[i]));
  }
  cert.dual_violation = std::max(0.0, u_inf - 1.0);

  const double cut = kSupportThreshold * c_inf;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double mag = std::abs(c[i]);
    if (mag > cut && mag > 0.0) {
      ++cert.support_size;
      cert.sign_alignment = std::max(cert.sign_alignment, std::abs(u[i] - c[i] / mag));
    }
  }

  const double shrink = 1.0 / std::max(1.0, u_inf);
  cert.dual_objective = shrink * (-re_dot(dual, problem.y) - problem.eta * kernels::norm(dual));
  const double objective = kernels::abs_sum(c);
  cert.dual_gap = objective - cert.dual_objective;
  cert.relative_gap = cert.dual_gap / std::max(1.0, objective);
  return cert;
}

Certificate residual_certificate(const RecoveryResult& result, const RecoveryProblem& problem) {
  return residual_certificate(problem, result.c_hat, result.dual);
}

namespace {

/// Exact projection onto {c : ||A c - y|| <= eta}, given ac = A c. Uses A A^* = I:
/// only the component in the row space of A moves, by A^*(r - eta r / ||r||).
void project_feasible(const MeasurementOperator& op, std::span<const cplx> c, std::span<const cplx> ac,
                      std::span<const cplx> y, double eta, std::span<cplx> out, CVec& r,
                      MeasurementOperator::Workspace& ws) {
  kernels::axpby(1.0, ac, -1.0, y, r);
  const double len = kernels::norm(r);
  std::copy(c.begin(), c.end(), out.begin());
  if (len <= eta) return;
  kernels::scale(r, 1.0 - eta / len);
  CVec step(c.size());
  op.adjoint(r, step, ws);
  kernels::axpby(1.0, out, -1.0, step, out);
}

/// In-place Cholesky solve of the Hermitian positive definite system M x = b
/// (M row-major, d x d). Returns false if M is not numerically positive definite.
bool cholesky_solve(CVec& M, CVec& b, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double diag = M[j * d + j].real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(M[j * d + k]);
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    M[j * d + j] = ljj;
    for (std::size_t i = j + 1; i < d; ++i) {
      cplx v = M[i * d + j];
      for (std::size_t k = 0; k < j; ++k) v -= M[i * d + k] * std::conj(M[j * d + k]);
      M[i * d + j] = v / ljj;
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    cplx v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= M[i * d + k] * b[k];
    b[i] = v / M[i * d + i].real();
  }
  for (std::size_t i = d; i-- > 0;) {
    cplx v = b[i];
    for (std::size_t k = i + 1; k < d; ++k) v -= std::conj(M[k * d + i]) * b[k];
    b[i] = v / M[i * d + i].real();
  }
  return true;
}

/// QCBP restricted to a support S. For a multiplier lambda, c(lambda)
/// minimizes ||c||_1 + lambda/2 ||A_S c - y||^2; with |S| < m the Gram matrix
/// G = A_S^* A_S is well conditioned, so accelerated proximal gradient
/// converges linearly at a rate that does not depend on lambda. The outer
/// loop tunes lambda so that ||A_S c - y|| = eta.
class SupportPolish {
 public:
  /// `budget` counts FISTA iterations and is shared across rounds.
  SupportPolish(const MeasurementOperator& op, std::span<const cplx> y, const std::vector<std::size_t>& support,
                long& budget)
      : s_(support.size()), y_(y.begin(), y.end()), G_(s_ * s_), b_(s_), budget_(&budget) {
    cols_.assign(s_, CVec(op.m()));
    CVec e(op.n());
    for (std::size_t a = 0; a < s_; ++a) {
      e[support[a]] = 1.0;
      cols_[a] = op.forward(e);
      e[support[a]] = 0.0;
    }
    for (std::size_t a = 0; a < s_; ++a) {
      for (std::size_t c = 0; c < s_; ++c) G_[a * s_ + c] = kernels::dot(cols_[a], cols_[c]);
      b_[a] = kernels::dot(cols_[a], y_);
    }
    // Gershgorin bound on ||G||; at most 1 since ||A|| <= 1, but cheap to tighten.
    for (std::size_t a = 0; a < s_; ++a) {
      double row = 0.0;
      for (std::size_t c = 0; c < s_; ++c) row += std::abs(G_[a * s_ + c]);
      g_norm_ = std::max(g_norm_, row);
    }
    g_norm_ = std::min(g_norm_, 1.0);
  }

  /// Solution for the noise level eta, warm-started from `start`, with the
  /// residual within `window` of eta; nothing if no lambda reaches the
  /// constraint (support too small) or G is singular.
  std::optional<CVec> solve(std::span<const cplx> start, double eta, double window, double lambda0, double& lambda) {
    x_.assign(start.begin(), start.end());
    if (eta <= 0.0) {
      CVec M = G_, z = b_;
      if (!cholesky_solve(M, z, s_)) return std::nullopt;
      x_ = z;
      lambda = std::numeric_limits<double>::infinity();
      return x_;
    }

    // Bracket lambda: the residual decreases as lambda grows.
    double lam = std::max(lambda0, 1e-6), lo = 0.0, hi = 0.0, r_lo = 0.0, r_hi = 0.0;
    double r = eval(lam);
    if (spent()) return std::nullopt;
    const bool above = r > eta;
    for (int i = 0; i < 80 && (r > eta) == above; ++i) {
      (above ? lo : hi) = lam;
      (above ? r_lo : r_hi) = r;
      lam *= above ? 4.0 : 0.25;
      r = eval(lam);
      if (spent()) return std::nullopt;
    }
    if ((r > eta) == above) return std::nullopt;
    (above ? hi : lo) = lam;
    (above ? r_hi : r_lo) = r;

    // Illinois regula falsi on log(residual / eta) over log(lambda).
    double t_lo = std::log(lo), t_hi = std::log(hi);
    double f_lo = std::log(r_lo / eta), f_hi = std::log(r_hi / eta);
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      const double t = (t_lo * f_hi - t_hi * f_lo) / (f_hi - f_lo);
      r = eval(std::exp(t));
      if (spent()) return std::nullopt;
      if (std::abs(r - eta) <= window) {
        t_hi = t;
        break;
      }
      const double f = std::log(r / eta);
      if (f > 0.0) {
        t_lo = t, f_lo = f;
        if (side == -1) f_hi *= 0.5;
        side = -1;
      } else {
        t_hi = t, f_hi = f;
        if (side == 1) f_lo *= 0.5;
        side = 1;
      }
      if (t_hi - t_lo <= 1e-15 * std::max(1.0, std::abs(t_hi))) break;
    }
    // Finish on the feasible side of the bracket.
    lambda = std::exp(t_hi);
    if (r > eta + window) r = eval(lambda);
    if (spent() || r > eta + window) return std::nullopt;
    return x_;
  }

  /// v = -A_S (A_S^* A_S)^{-1} sgn: the least-norm v with (-A^* v)_S = sgn.
  std::optional<CVec> least_norm_dual(std::span<const cplx> sgn) const {
    CVec M = G_, z(sgn.begin(), sgn.end());
    if (!cholesky_solve(M, z, s_)) return std::nullopt;
    CVec v(y_.size());
    for (std::size_t a = 0; a < s_; ++a)
      for (std::size_t q = 0; q < v.size(); ++q) v[q] -= cols_[a][q] * z[a];
    return v;
  }

 private:
  bool spent() const { return *budget_ <= 0; }

  void gram_apply(const CVec& x, CVec& out) const {
    for (std::size_t a = 0; a < s_; ++a) {
      cplx acc = 0.0;
      for (std::size_t c = 0; c < s_; ++c) acc += G_[a * s_ + c] * x[c];
      out[a] = acc;
    }
  }

  /// FISTA on the restricted Lagrangian, warm started from x_, with the
  /// gradient restart test (function values lose all precision when lambda
  /// is large). Returns ||A_S c - y||.
  double eval(double lambda) {
    const double step = 1.0 / (lambda * g_norm_);
    CVec z = x_, prev = x_, gz(s_), next(s_);
    double theta = 1.0;
    for (int it = 0; it < 50000 && *budget_ > 0; ++it, --*budget_) {
      gram_apply(z, gz);
      double change = 0.0, size = 0.0, restart = 0.0;
      for (std::size_t a = 0; a < s_; ++a) {
        const cplx w = z[a] - step * lambda * (gz[a] - b_[a]);
        const double mag = std::abs(w);
        next[a] = mag > step ? w * ((mag - step) / mag) : cplx(0.0);
        change = std::max(change, std::abs(next[a] - x_[a]));
        size = std::max(size, std::abs(next[a]));
        restart += (std::conj(z[a] - next[a]) * (next[a] - x_[a])).real();
      }
      const double theta_next = restart > 0.0 ? 1.0 : 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      const double momentum = restart > 0.0 ? 0.0 : (theta - 1.0) / theta_next;
      prev.swap(x_);
      x_ = next;
      for (std::size_t a = 0; a < s_; ++a) z[a] = x_[a] + momentum * (x_[a] - prev[a]);
      theta = theta_next;
      if (change <= 1e-14 * size) break;
    }
    CVec r = y_;
    for (std::size_t a = 0; a < s_; ++a)
      for (std::size_t q = 0; q < r.size(); ++q) r[q] -= cols_[a][q] * x_[a];
    return kernels::norm(r);
  }

  std::size_t s_;
  CVec y_;
  std::vector<CVec> cols_;
  CVec G_, b_, x_;
  double g_norm_ = 0.0;
  long* budget_;
};

// The gap inherits the rounding of the dual, so it gets the dual tolerance.
constexpr long kPolishBudget = 20000;
constexpr int kMaxFailedPolish = 2;

bool certified(const Certificate& cert, const SolverOptions& options) {
  return cert.dual_violation <= options.tol_dual && cert.relative_gap <= std::max(options.tol_gap, options.tol_dual);
}

struct Polished {
  CVec c;
  CVec dual;
  Certificate cert;
};

/// Active-set polish starting from the support of `iterate`: solve the
/// restricted problem, add the indices where |(A^* v)_i| > 1, and repeat
/// until the certificate verifies the point on the full problem. The dual is
/// the KKT multiplier v = lambda (A c - y), or the least-norm dual when eta = 0.
std::optional<Polished> polish_on_support(const RecoveryProblem& problem, std::span<const cplx> iterate,
                                          std::span<const cplx> dual_guess, const SolverOptions& options,
                                          double tol_feas) {
  const auto& op = *problem.op;
  const std::size_t n = op.n(), m = op.m();
  std::vector<std::size_t> support;
  CVec start;
  for (std::size_t i = 0; i < n; ++i) {
    if (iterate[i] != cplx(0.0)) {
      support.push_back(i);
      start.push_back(iterate[i]);
    }
  }
  double lambda = problem.eta > 0.0 ? kernels::norm(dual_guess) / problem.eta : 0.0;
  // A complex l1 minimizer can have more than m nonzeros (each coefficient
  // has two real degrees of freedom). The restricted Gram matrix is then
  // singular, which only matters on the eta = 0 path.
  const std::size_t cap = std::min(n, problem.eta > 0.0 ? 2 * m : m);
  // Hard instances (supports near the cap, singular Gram) converge slowly;
  // give up rather than stall the trial.
  long budget = kPolishBudget;
  for (int round = 0; round < 32; ++round) {
    if (support.empty() || support.size() > cap) return std::nullopt;
    SupportPolish sp(op, problem.y, support, budget);
    const auto cs = sp.solve(start, problem.eta, 0.25 * tol_feas, lambda, lambda);
    if (!cs) return std::nullopt;

    Polished out;
    out.c.assign(n, cplx(0.0));
    for (std::size_t a = 0; a < support.size(); ++a) out.c[support[a]] = (*cs)[a];
    if (problem.eta > 0.0) {
      CVec r = op.forward(out.c);
      kernels::axpby(1.0, r, -1.0, problem.y, r);  // A c - y
      out.dual = std::move(r);
      kernels::scale(out.dual, lambda);
    } else {
      CVec sgn(support.size());
      for (std::size_t a = 0; a < support.size(); ++a) sgn[a] = (*cs)[a] / std::abs((*cs)[a]);
      auto v = sp.least_norm_dual(sgn);
      if (!v) return std::nullopt;
      out.dual = std::move(*v);
    }
    out.cert = residual_certificate(problem, out.c, out.dual);
    if (out.cert.feasibility_surplus > tol_feas) return std::nullopt;
    if (out.cert.dual_violation <= options.tol_dual) {
      if (!certified(out.cert, options)) return std::nullopt;
      return out;
    }
    if (problem.eta <= 0.0) return std::nullopt;

    // Grow the support by the violated coordinates, which start at zero.
    // Entries the restricted solve set to zero stay; they cost nothing.
    const CVec u = op.adjoint(out.dual);
    std::vector<std::size_t> next = support;
    CVec next_start = *cs;
    std::vector<std::pair<double, std::size_t>> violated;
    for (std::size_t i = 0; i < n; ++i) {
      if (out.c[i] == cplx(0.0) && std::abs(u[i]) > 1.0 + options.tol_dual) violated.emplace_back(std::abs(u[i]), i);
    }
    std::sort(violated.begin(), violated.end(), std::greater<>());
    for (const auto& [mag, i] : violated) {
      if (next.size() >= cap) break;
      next.push_back(i);
      next_start.push_back(0.0);
    }
    if (next == support) return std::nullopt;
    support = std::move(next);
    start = std::move(next_start);
  }
  return std::nullopt;
}

}  // namespace

RecoveryResult solve_qcbp(const RecoveryProblem& problem, const SolverOptions& options) {
  if (options.max_iter < 1 || options.window < 1) throw ParameterError("max_iter and window must be positive");
  if (!(options.tau > 0.0) || !(options.sigma > 0.0) || options.tau * options.sigma >= 1.0) {
    throw ParameterError("step sizes need tau, sigma > 0 and tau * sigma < 1");
  }
  if (!(options.tol_dual >= 0.0)) throw ParameterError("tol_dual must be nonnegative");
  const auto& op = *problem.op;
  const std::size_t n = op.n(), m = op.m();
  RecoveryResult res;

  // The program is positively homogeneous, so solve it for y / ||y||.
  const double y_norm = kernels::norm(problem.y);
  if (y_norm <= problem.eta) {
    // c = 0 is feasible and optimal; v = 0 certifies it.
    res.c_hat.assign(n, cplx(0.0));
    res.dual.assign(m, cplx(0.0));
    res.x_hat.assign(n, cplx(0.0));
    res.residual_norm = y_norm;
    res.primal_residual = y_norm - problem.eta;
    res.certificate = residual_certificate(res, problem);
    res.converged = true;
    return res;
  }
  CVec y_unit = problem.y;
  kernels::scale(y_unit, 1.0 / y_norm);
  const RecoveryProblem unit(problem.op, std::move(y_unit), problem.eta / y_norm);
  const std::span<const cplx> y = unit.y;
  const double eta = unit.eta;
  const double tau = options.tau, sigma = options.sigma;
  const double tol_feas = options.tol_feas_rel + options.tol_feas_abs / y_norm;

  MeasurementOperator::Workspace ws(n);
  CVec c(n), c_prev(n), grad(n), shadow(n);
  CVec v(m), ac(m), ac_prev(m), work(m), d(m);

  // The iterate c reaches the constraint only slowly when eta is small: the
  // multiplier grows like 1/eta and the dual moves O(sigma eta) per step in
  // directions that leave the support fixed. Convergence is therefore judged
  // on the projection of c onto the feasible set, or on the polished point.
  double residual = 1.0;
  double last_objective = -1.0;
  std::vector<std::size_t> last_support, tried_support;
  int failed_polish = 0;
  std::optional<Polished> polished;
  int it = 0;
  for (it = 1; it <= options.max_iter; ++it) {
    // Dual step: v <- prox_{sigma g*}(v + sigma A (2 c - c_prev)), with g the
    // indicator of the ball B(y, eta), via Moreau: w - sigma proj_B(w / sigma).
    kernels::axpby(2.0, ac, -1.0, ac_prev, work);
    kernels::axpby(1.0, v, sigma, work, work);
    kernels::axpby(1.0 / sigma, work, -1.0, y, d);
    const double dist = kernels::norm(d);
    const double s = dist > eta ? eta / dist : 1.0;
    kernels::axpby(1.0, work, -sigma, y, v);
    kernels::axpby(1.0, v, -sigma * s, d, v);

    // Primal step: c <- soft(c - tau A^* v, tau).
    std::swap(c, c_prev);
    std::swap(ac, ac_prev);
    op.adjoint(v, grad, ws);
    kernels::axpby(1.0, c_prev, -tau, grad, grad);
    kernels::soft_threshold(grad, c, tau);
    op.forward(c, ac, ws);

    if (it % options.window != 0 && it != options.max_iter) continue;
    project_feasible(op, c, ac, y, eta, shadow, d, ws);
    op.forward(shadow, work, ws);
    kernels::axpby(1.0, y, -1.0, work, work);
    residual = kernels::norm(work);
    const double objective = kernels::abs_sum(shadow);
    const bool settled = last_objective >= 0.0 && residual - eta <= tol_feas &&
                         std::abs(objective - last_objective) <= options.tol_gap * objective;
    last_objective = objective;

    if (settled && (!options.polish || certified(residual_certificate(unit, shadow, v), options))) {
      res.converged = true;
      break;
    }
    if (!options.polish) continue;
    // Polish once per stable support.
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i)
      if (c[i] != cplx(0.0)) support.push_back(i);
    const bool stable = support == last_support;
    last_support = support;
    if (!stable || support == tried_support || failed_polish >= kMaxFailedPolish) continue;
    tried_support = support;
    polished = polish_on_support(unit, c, v, options, tol_feas);
    if (polished) {
      res.converged = true;
      break;
    }
    ++failed_polish;
  }

  res.iterations = std::min(it, options.max_iter);
  if (polished) {
    res.c_hat = std::move(polished->c);
    res.dual = std::move(polished->dual);
    res.polished = true;
  } else {
    res.c_hat = std::move(shadow);
    res.dual = std::move(v);
  }
  kernels::scale(res.c_hat, y_norm);
  res.x_hat = haar_inverse(res.c_hat);
  res.certificate = residual_certificate(res, problem);
  res.residual_norm = res.certificate.residual_norm;
  res.primal_residual = res.residual_norm - problem.eta;
  res.objective = kernels::abs_sum(res.c_hat);
  return res;
}

CVec add_noise(std::span<const cplx> clean, double eta, std::uint64_t seed) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be finite and nonnegative");
  CVec out(clean.begin(), clean.end());
  if (eta == 0.0 || out.empty()) return out;
  Rng rng(seed);
  CVec e(out.size());
  for (auto& ei : e) {
    const double re = rng.normal();
    ei = cplx(re, rng.normal());
  }
  const double len = kernels::norm(e);
  kernels::axpby(1.0, out, eta / len, e, out);
  return out;
}

}  // namespace fhcs
