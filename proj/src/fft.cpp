#include "fhcs/fft.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "fhcs/kernels.hpp"

namespace fhcs {
namespace {

void check(std::size_t n) {
  if (n < 2 || !is_power_of_two(n)) {
    throw SizeError("DFT length must be a power of two >= 2, got " + std::to_string(n));
  }
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n), bitrev_(n), twiddle_pos_(n - 1), twiddle_neg_(n - 1) {
  check(n);
  const int bits = ilog2(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t rev = 0;
    for (int b = 0; b < bits; ++b) rev |= static_cast<std::uint32_t>((i >> b) & 1U) << (bits - 1 - b);
    bitrev_[i] = rev;
  }
  for (std::size_t h = 1; h < n; h *= 2) {
    for (std::size_t k = 0; k < h; ++k) {
      const double angle = std::numbers::pi * static_cast<double>(k) / static_cast<double>(h);
      twiddle_pos_[h - 1 + k] = {std::cos(angle), std::sin(angle)};
      twiddle_neg_[h - 1 + k] = {std::cos(angle), -std::sin(angle)};
    }
  }
}

void FftPlan::transform(std::span<cplx> data, int sign) const {
  if (data.size() != n_) throw SizeError("FFT input size does not match plan");
  for (std::size_t i = 0; i < n_; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  const CVec& tw = sign > 0 ? twiddle_pos_ : twiddle_neg_;
  const auto& k = kernels::active();
  for (std::size_t h = 1; h < n_; h *= 2) {
    const cplx* w = tw.data() + (h - 1);
    for (std::size_t start = 0; start < n_; start += 2 * h) {
      k.butterfly(data.data() + start, data.data() + start + h, w, h);
    }
  }
}

std::shared_ptr<const FftPlan> fft_plan(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const FftPlan>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const FftPlan>(n);
  return slot;
}

int frequency_of_slot(std::size_t slot, std::size_t n) {
  if (slot >= n) throw IndexError("frequency slot out of range");
  return static_cast<int>(slot) - static_cast<int>(n / 2) + 1;
}

std::size_t slot_of_frequency(int omega, std::size_t n) {
  const int half = static_cast<int>(n / 2);
  if (omega <= -half || omega > half) {
    throw IndexError("frequency " + std::to_string(omega) + " outside (-n/2, n/2] for n = " +
                     std::to_string(n));
  }
  return static_cast<std::size_t>(omega + half - 1);
}

std::size_t fft_bin_of_slot(std::size_t slot, std::size_t n) {
  const int omega = frequency_of_slot(slot, n);
  return omega >= 0 ? static_cast<std::size_t>(omega) : static_cast<std::size_t>(omega + static_cast<int>(n));
}

CVec dft_forward(std::span<const cplx> x) {
  const std::size_t n = x.size();
  check(n);
  CVec buf(x.begin(), x.end());
  fft_plan(n)->transform(buf, +1);
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  CVec out(n);
  for (std::size_t slot = 0; slot < n; ++slot) out[slot] = buf[fft_bin_of_slot(slot, n)] * s;
  return out;
}

CVec dft_inverse(std::span<const cplx> y) {
  const std::size_t n = y.size();
  check(n);
  CVec buf(n);
  for (std::size_t slot = 0; slot < n; ++slot) buf[fft_bin_of_slot(slot, n)] = y[slot];
  fft_plan(n)->transform(buf, -1);
  kernels::scale(buf, 1.0 / std::sqrt(static_cast<double>(n)));
  return buf;
}

}  // namespace fhcs
