#pragma once

// Unitary DFT with centred frequency indexing.
//
//   F x(omega) = n^{-1/2} sum_{t=0}^{n-1} x(t) e^{+2 pi i omega t / n},
//   omega = -n/2+1, ..., n/2.
//
// Frequency vectors are stored in ascending omega: slot s holds
// omega = s - n/2 + 1. The FFT bin of omega is omega mod n.

#include <memory>
#include <span>
#include <vector>

#include "fhcs/types.hpp"

namespace fhcs {

/// Radix-2 decimation-in-time FFT plan; immutable after construction.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const noexcept { return n_; }

  /// In place, unnormalized: X[k] = sum_t x[t] e^{sign 2 pi i k t / n}, sign = +1 or -1.
  void transform(std::span<cplx> data, int sign) const;

 private:
  std::size_t n_;
  std::vector<std::uint32_t> bitrev_;
  // Stage with half-length h keeps its h twiddles at offset h - 1.
  CVec twiddle_pos_;
  CVec twiddle_neg_;
};

/// Shared plan for size n (thread-safe cache).
std::shared_ptr<const FftPlan> fft_plan(std::size_t n);

int frequency_of_slot(std::size_t slot, std::size_t n);
/// Throws IndexError if omega is outside {-n/2+1, ..., n/2}.
std::size_t slot_of_frequency(int omega, std::size_t n);
/// FFT bin (omega mod n) of a frequency slot.
std::size_t fft_bin_of_slot(std::size_t slot, std::size_t n);

/// F x, centred ordering.
CVec dft_forward(std::span<const cplx> x);
/// F^* y (inverse of dft_forward), y in centred ordering.
CVec dft_inverse(std::span<const cplx> y);

}  // namespace fhcs
