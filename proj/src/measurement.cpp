#include "fhcs/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fhcs/haar.hpp"
#include "fhcs/kernels.hpp"

namespace fhcs {

MeasurementOperator::MeasurementOperator(BandPlan plan) : plan_(std::move(plan)) {
  validate(plan_);
  fft_ = fft_plan(plan_.n());
  const std::size_t n = plan_.n();
  bins_.reserve(plan_.omega.size());
  for (int omega : plan_.omega) bins_.push_back(fft_bin_of_slot(slot_of_frequency(omega, n), n));
}

void MeasurementOperator::forward(std::span<const cplx> c, std::span<cplx> y, Workspace& ws) const {
  const std::size_t n = plan_.n();
  if (c.size() != n) {
    throw SizeError("coefficient vector has length " + std::to_string(c.size()) +
                    ", operator expects " + std::to_string(n));
  }
  if (y.size() != bins_.size()) throw SizeError("measurement vector length mismatch");
  haar_inverse(c, ws.a, ws.b);
  fft_->transform(ws.a, +1);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < bins_.size(); ++i) y[i] = ws.a[bins_[i]] * s;
}

void MeasurementOperator::adjoint(std::span<const cplx> y, std::span<cplx> c, Workspace& ws) const {
  const std::size_t n = plan_.n();
  if (y.size() != bins_.size()) {
    throw SizeError("measurement vector has length " + std::to_string(y.size()) +
                    ", operator expects " + std::to_string(bins_.size()));
  }
  if (c.size() != n) throw SizeError("coefficient vector length mismatch");
  std::fill(ws.a.begin(), ws.a.end(), cplx{0.0, 0.0});
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < bins_.size(); ++i) ws.a[bins_[i]] = y[i] * s;
  fft_->transform(ws.a, -1);
  haar_forward(ws.a, c, ws.b);
}

CVec MeasurementOperator::forward(std::span<const cplx> c) const {
  Workspace ws(n());
  CVec y(m());
  forward(c, y, ws);
  return y;
}

CVec MeasurementOperator::adjoint(std::span<const cplx> y) const {
  Workspace ws(n());
  CVec c(n());
  adjoint(y, c, ws);
  return c;
}

DenseMatrix measurement_matrix(const ChangeOfBasisMatrix& u, const BandPlan& plan) {
  if (u.n() != plan.n()) throw SizeError("matrix and plan disagree on n");
  const std::size_t n = u.n(), m = plan.m();
  DenseMatrix a{m, n, CVec(m * n)};
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t slot = slot_of_frequency(plan.omega[i], n);
    for (std::size_t c = 0; c < n; ++c) a(i, c) = u.dense()(slot, c);
  }
  return a;
}

}  // namespace fhcs
