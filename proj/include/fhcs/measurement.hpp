#pragma once

// Subsampled Fourier measurements of Haar coefficients: A = P_Omega F Phi.
//
// forward:  c -> Haar synthesis -> DFT -> keep rows in Omega (ascending omega)
// adjoint:  y -> zero-fill -> inverse DFT -> Haar analysis
// Both run in O(n log n). A has orthonormal rows, so A A^* = I_m and ||A||_2 <= 1.

#include <memory>
#include <span>

#include "fhcs/bands.hpp"
#include "fhcs/fft.hpp"
#include "fhcs/fourier_haar.hpp"

namespace fhcs {

class MeasurementOperator {
 public:
  explicit MeasurementOperator(BandPlan plan);

  const BandPlan& plan() const noexcept { return plan_; }
  std::size_t n() const noexcept { return plan_.n(); }
  std::size_t m() const noexcept { return plan_.m(); }

  CVec forward(std::span<const cplx> c) const;
  CVec adjoint(std::span<const cplx> y) const;

  /// Scratch buffers for the allocation-free overloads.
  struct Workspace {
    CVec a;
    CVec b;
    explicit Workspace(std::size_t n) : a(n), b(n) {}
  };
  void forward(std::span<const cplx> c, std::span<cplx> y, Workspace& ws) const;
  void adjoint(std::span<const cplx> y, std::span<cplx> c, Workspace& ws) const;

 private:
  BandPlan plan_;
  std::shared_ptr<const FftPlan> fft_;
  std::vector<std::size_t> bins_;  // FFT bin of each sampled frequency
};

/// Dense A = P_Omega U: rows of u selected by plan.omega.
DenseMatrix measurement_matrix(const ChangeOfBasisMatrix& u, const BandPlan& plan);

}  // namespace fhcs
