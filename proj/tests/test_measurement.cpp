#include <gtest/gtest.h>

#include <cmath>

#include "fhcs/bands.hpp"
#include "fhcs/fourier_haar.hpp"
#include "fhcs/kernels.hpp"
#include "fhcs/measurement.hpp"
#include "oracles.hpp"

using namespace fhcs;

namespace {

BandPlan some_plan(int r, std::uint64_t seed) {
  std::vector<int> budgets;
  for (int j = 0; j < r; ++j) budgets.push_back(static_cast<int>(band_size(j) / 2 + (j == 0)));
  return draw_omega(r, budgets, seed);
}

}  // namespace

TEST(Measurement, ForwardMatchesDenseOracle) {
  for (int r : {3, 6}) {
    const std::size_t n = std::size_t{1} << r;
    const BandPlan plan = some_plan(r, 17);
    const MeasurementOperator op(plan);
    const CVec c = oracle::random_vector(n, 3);
    const CVec y = op.forward(c);
    ASSERT_EQ(y.size(), plan.m());
    for (std::size_t q = 0; q < plan.m(); ++q) {
      cplx want = 0.0;
      for (std::size_t i = 0; i < n; ++i) want += oracle::u_entry(n, plan.omega[q], i) * c[i];
      EXPECT_NEAR(std::abs(y[q] - want), 0.0, 1e-11);
    }
  }
}

TEST(Measurement, DenseMatrixSelectsRows) {
  const auto u = build_U(LevelStructure(5), BuildMode::analytic);
  const BandPlan plan = some_plan(5, 2);
  const DenseMatrix a = measurement_matrix(u, plan);
  const MeasurementOperator op(plan);
  for (std::size_t i = 0; i < 32; ++i) {
    CVec e(32);
    e[i] = 1.0;
    const CVec col = op.forward(e);
    for (std::size_t q = 0; q < plan.m(); ++q) EXPECT_NEAR(std::abs(col[q] - a(q, i)), 0.0, 1e-13);
  }
}

TEST(Measurement, AdjointIdentity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BandPlan plan = some_plan(7, seed);
    const MeasurementOperator op(plan);
    const CVec c = oracle::random_vector(128, 100 + seed);
    const CVec y = oracle::random_vector(plan.m(), 200 + seed);
    const cplx lhs = kernels::dot(y, op.forward(c));
    const cplx rhs = kernels::dot(op.adjoint(y), c);
    EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST(Measurement, RowsAreOrthonormal) {
  const BandPlan plan = some_plan(6, 9);
  const MeasurementOperator op(plan);
  const CVec y = oracle::random_vector(plan.m(), 4);
  const CVec back = op.forward(op.adjoint(y));
  for (std::size_t q = 0; q < y.size(); ++q) EXPECT_NEAR(std::abs(back[q] - y[q]), 0.0, 1e-13);
}

TEST(Measurement, FullPlanIsUnitary) {
  const MeasurementOperator op(full_plan(6));
  const CVec c = oracle::random_vector(64, 8);
  const CVec back = op.adjoint(op.forward(c));
  for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(std::abs(back[i] - c[i]), 0.0, 1e-13);
  EXPECT_THROW(op.forward(CVec(32)), SizeError);
}
