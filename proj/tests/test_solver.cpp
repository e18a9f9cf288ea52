#include <gtest/gtest.h>

#include <cmath>

#include "fhcs/bands.hpp"
#include "fhcs/haar.hpp"
#include "fhcs/kernels.hpp"
#include "fhcs/levels.hpp"
#include "fhcs/solver.hpp"
#include "oracles.hpp"

using namespace fhcs;

namespace {

struct Instance {
  CVec c;
  std::shared_ptr<MeasurementOperator> op;
  RecoveryProblem problem;
};

Instance make_instance(int r, const std::vector<int>& k, const std::vector<int>& budgets, double eta_rel,
                       std::uint64_t seed) {
  const LevelStructure L(r);
  CVec c = random_sparse_in_levels(L, SparsityPattern(L, k), seed);
  auto op = std::make_shared<MeasurementOperator>(draw_omega(r, budgets, seed + 1));
  const CVec clean = op->forward(c);
  const double eta = eta_rel * kernels::norm(clean);
  CVec y = add_noise(clean, eta, seed + 2);
  return {std::move(c), op, RecoveryProblem(op, std::move(y), eta)};
}

double rel_diff(const CVec& a, const CVec& b) {
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += std::norm(a[i] - b[i]);
  return std::sqrt(num) / std::max(1e-300, oracle::l2(b));
}

const std::vector<int> kK32 = {1, 1, 2, 2, 2};
const std::vector<int> kM32 = {2, 2, 4, 6, 10};

}  // namespace

TEST(Solver, FullSamplingWithoutNoiseIsExact) {
  auto op = std::make_shared<MeasurementOperator>(full_plan(6));
  const CVec c = oracle::random_vector(64, 1);
  const RecoveryProblem p(op, op->forward(c), 0.0);
  const auto res = solve_qcbp(p);
  EXPECT_TRUE(res.converged);
  EXPECT_LT(rel_diff(res.c_hat, c), 1e-12);
  const CVec x = haar_inverse(c);
  EXPECT_LT(rel_diff(res.x_hat, x), 1e-12);
}

TEST(Solver, ZeroMeasurementsGiveZero) {
  auto op = std::make_shared<MeasurementOperator>(draw_omega(5, kM32, 3));
  const RecoveryProblem p(op, CVec(op->m()), 0.0);
  const auto res = solve_qcbp(p);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(oracle::l1(res.c_hat), 0.0);
  EXPECT_EQ(res.objective, 0.0);
}

TEST(Solver, SparseRecoveryIsAccurate) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = make_instance(8, {2, 2, 3, 4, 4, 3, 2, 1}, {2, 2, 4, 8, 12, 14, 12, 10}, 1e-6, 100 * seed);
    const auto res = solve_qcbp(inst.problem);
    EXPECT_TRUE(res.converged) << seed;
    EXPECT_LE(res.primal_residual, 1e-9 * oracle::l2(inst.problem.y) + 1e-12);
    EXPECT_LT(rel_diff(res.c_hat, inst.c), 1e-4) << seed;
  }
}

TEST(Solver, MatchesSubgradientOracle) {
  for (std::uint64_t seed : {7u, 8u}) {
    const auto inst = make_instance(5, kK32, kM32, 1e-3, seed);
    const auto res = solve_qcbp(inst.problem);
    const auto a = oracle::dense_A(32, inst.op->plan().omega);
    const auto ref = oracle::subgradient_qcbp(a, inst.problem.y, inst.problem.eta, 32);
    EXPECT_LT(rel_diff(res.c_hat, ref.c), 1e-4) << seed;
    EXPECT_NEAR(res.objective, ref.objective, 1e-4 * ref.objective) << seed;
    // The oracle's best point is feasible, so the library cannot beat it by more than rounding.
    EXPECT_LE(res.objective, ref.objective * (1.0 + 1e-6));
  }
}

TEST(Solver, CertificatePositiveControl) {
  const auto inst = make_instance(6, {1, 1, 2, 2, 2, 1}, {2, 2, 4, 6, 10, 14}, 1e-4, 11);
  const auto res = solve_qcbp(inst.problem);
  const auto& cert = res.certificate;
  EXPECT_LE(cert.feasibility_surplus, 1e-9 * oracle::l2(inst.problem.y));
  EXPECT_LT(cert.dual_violation, 1e-5);
  EXPECT_LT(cert.sign_alignment, 1e-3);
  EXPECT_GE(cert.dual_gap, -1e-9);  // weak duality for a feasible point
  EXPECT_LT(cert.relative_gap, 1e-6);
  EXPECT_GT(cert.support_size, 0u);
}

TEST(Solver, CertificateNegativeControls) {
  const auto inst = make_instance(6, {1, 1, 2, 2, 2, 1}, {2, 2, 4, 6, 10, 14}, 1e-4, 11);
  const auto res = solve_qcbp(inst.problem);

  // A feasible but non-minimal point: add a null-space component.
  CVec z = oracle::random_vector(64, 5);
  CVec az = inst.op->adjoint(inst.op->forward(z));
  CVec c = res.c_hat;
  for (std::size_t i = 0; i < 64; ++i) c[i] += 0.3 * (z[i] - az[i]);
  const auto bad = residual_certificate(inst.problem, c, res.dual);
  EXPECT_LE(bad.feasibility_surplus, 1e-9);
  EXPECT_GT(bad.relative_gap, 1e-2);
  EXPECT_GT(bad.sign_alignment, 0.1);

  // An arbitrary dual vector violates the sup-norm constraint.
  CVec v = oracle::random_vector(inst.op->m(), 6);
  for (auto& x : v) x *= 10.0;
  const auto wild = residual_certificate(inst.problem, res.c_hat, v);
  EXPECT_GT(wild.dual_violation, 1.0);
  // The rescaled dual still gives a valid lower bound.
  EXPECT_GE(wild.dual_gap, -1e-9);

  // Infeasible point.
  const auto infeasible = residual_certificate(inst.problem, CVec(64), res.dual);
  EXPECT_GT(infeasible.feasibility_surplus, 0.5 * oracle::l2(inst.problem.y));
}

TEST(Solver, ScaleEquivariance) {
  const auto inst = make_instance(6, {1, 1, 2, 2, 2, 1}, {2, 2, 4, 6, 10, 14}, 1e-3, 21);
  const auto base = solve_qcbp(inst.problem);
  for (double alpha : {1e-3, 7.0, 1e4}) {
    CVec y = inst.problem.y;
    for (auto& v : y) v *= alpha;
    const auto scaled = solve_qcbp(RecoveryProblem(inst.op, y, alpha * inst.problem.eta));
    CVec want = base.c_hat;
    for (auto& v : want) v *= alpha;
    EXPECT_LT(rel_diff(scaled.c_hat, want), 1e-6) << alpha;
  }
}

// Error grows at most linearly with the noise level for exactly sparse
// signals: fit C_exp = max ||c_hat - c|| / eta over a range of eta.
TEST(Solver, ErrorIsLinearInNoise) {
  double c_exp = 0.0;
  for (double eta_rel : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto inst = make_instance(7, {1, 2, 2, 3, 3, 2, 1}, {2, 2, 4, 8, 12, 14, 12}, eta_rel, 40 + seed);
      const auto res = solve_qcbp(inst.problem);
      double err = 0.0;
      for (std::size_t i = 0; i < 128; ++i) err += std::norm(res.c_hat[i] - inst.c[i]);
      c_exp = std::max(c_exp, std::sqrt(err) / inst.problem.eta);
    }
  }
  EXPECT_GT(c_exp, 0.0);
  EXPECT_LT(c_exp, 10.0);
}

TEST(Solver, ReportsNonConvergence) {
  const auto inst = make_instance(6, {1, 1, 2, 2, 2, 1}, {2, 2, 4, 6, 10, 14}, 1e-6, 3);
  SolverOptions opts;
  opts.max_iter = 5;
  const auto res = solve_qcbp(inst.problem, opts);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 5);
  // Still exactly feasible, because the returned point is projected.
  EXPECT_LE(res.primal_residual, 1e-12);
}

TEST(Solver, RejectsBadInput) {
  auto op = std::make_shared<MeasurementOperator>(draw_omega(5, kM32, 3));
  EXPECT_THROW(RecoveryProblem(op, CVec(3), 0.0), SizeError);
  EXPECT_THROW(RecoveryProblem(op, CVec(op->m()), -1.0), ParameterError);
  EXPECT_THROW(RecoveryProblem(nullptr, CVec(), 0.0), ParameterError);
  SolverOptions bad;
  bad.tau = 1.5;
  bad.sigma = 1.0;
  EXPECT_THROW(solve_qcbp(RecoveryProblem(op, CVec(op->m()), 0.0), bad), ParameterError);
}

TEST(Solver, AddNoiseHasExactNorm) {
  const CVec y = oracle::random_vector(40, 2);
  const CVec noisy = add_noise(y, 0.25, 9);
  CVec e(40);
  for (std::size_t i = 0; i < 40; ++i) e[i] = noisy[i] - y[i];
  EXPECT_NEAR(oracle::l2(e), 0.25, 1e-14);
  EXPECT_EQ(add_noise(y, 0.25, 9), noisy);
  EXPECT_NE(add_noise(y, 0.25, 10), noisy);
  EXPECT_EQ(add_noise(y, 0.0, 9), y);
  EXPECT_THROW(add_noise(y, -1.0, 9), ParameterError);
}
