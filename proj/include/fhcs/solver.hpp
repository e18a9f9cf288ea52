#pragma once

// Quadratically constrained basis pursuit in Haar coefficients:
//
//   minimize ||c||_1  subject to  ||y - A c||_2 <= eta,   A = P_Omega F Phi,
//
// solved with the first-order primal-dual method of Chambolle and Pock on the
// problem rescaled to ||y|| = 1. Complex soft thresholding shrinks the modulus
// and keeps the phase. Once the support of the iterate is stable the solution
// is polished: the problem restricted to that support is solved with an
// accelerated proximal gradient method for the multiplier that puts the
// residual on the constraint, and violated coordinates join the support. A
// polished point is accepted only if the optimality certificate verifies it on
// the full problem. Otherwise the exact projection of the iterate onto the feasible set is returned (cheap
// because A A^* = I). The signal estimate is x = Phi c.

#include <cstdint>
#include <memory>
#include <span>

#include "fhcs/measurement.hpp"

namespace fhcs {

struct RecoveryProblem {
  std::shared_ptr<const MeasurementOperator> op;
  CVec y;
  double eta = 0.0;

  RecoveryProblem(std::shared_ptr<const MeasurementOperator> a, CVec measurements, double noise);
  std::size_t n() const noexcept { return op->n(); }
  std::size_t m() const noexcept { return op->m(); }
};

struct SolverOptions {
  int max_iter = 20000;
  /// Feasibility tolerance: ||y - A c|| - eta <= tol_feas_rel ||y|| + tol_feas_abs.
  double tol_feas_rel = 1e-9;
  double tol_feas_abs = 1e-12;
  /// Relative change of ||c||_1 between checks, which run every `window` iterations.
  double tol_gap = 1e-8;
  int window = 50;
  /// Primal and dual steps; tau * sigma * ||A||^2 < 1 with ||A|| <= 1.
  double tau = 0.99;
  double sigma = 0.99;
  /// Support-restricted polish; with it off, convergence is judged by
  /// feasibility and objective change alone.
  bool polish = true;
  /// Largest accepted max_i |(A^* v)_i| - 1, and relative dual gap, for a
  /// certified point. The dual
  /// v = lambda (A c - y) carries rounding amplified by lambda ~ ||v|| / eta.
  double tol_dual = 1e-7;
};

/// Approximate optimality of (c, v), where v is a dual vector for the
/// constraint and u = -A^* v should be a subgradient of ||.||_1 at c.
struct Certificate {
  double residual_norm = 0.0;        // ||y - A c||
  double feasibility_surplus = 0.0;  // max(0, ||y - A c|| - eta)
  double dual_violation = 0.0;       // max_i max(0, |u_i| - 1)
  double sign_alignment = 0.0;       // max over the support of |u_i - c_i / |c_i||
  double dual_objective = 0.0;       // -Re<v', y> - eta ||v'||, v' = v / max(1, ||u||_inf)
  double dual_gap = 0.0;             // ||c||_1 - dual_objective
  double relative_gap = 0.0;         // dual_gap / max(1, ||c||_1)
  std::size_t support_size = 0;
};

struct RecoveryResult {
  CVec c_hat;
  CVec x_hat;
  CVec dual;  // constraint multiplier v
  int iterations = 0;
  double residual_norm = 0.0;
  double primal_residual = 0.0;  // ||y - A c_hat|| - eta (negative when strictly inside)
  double objective = 0.0;        // ||c_hat||_1
  Certificate certificate;
  bool polished = false;
  bool converged = false;
};

RecoveryResult solve_qcbp(const RecoveryProblem& problem, const SolverOptions& options = {});

/// Coefficients with |c_i| > kSupportThreshold * max|c| count as the support.
inline constexpr double kSupportThreshold = 1e-6;

Certificate residual_certificate(const RecoveryResult& result, const RecoveryProblem& problem);
Certificate residual_certificate(const RecoveryProblem& problem, std::span<const cplx> c,
                                 std::span<const cplx> dual);

/// y + e with e complex Gaussian rescaled to ||e|| = eta exactly.
CVec add_noise(std::span<const cplx> clean, double eta, std::uint64_t seed);

}  // namespace fhcs
