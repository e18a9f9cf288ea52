#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdlib>
#include <string>

#include "fhcs/kernels.hpp"

namespace fhcs::kernels {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(FHCS_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* env = std::getenv("FHCS_SIMD")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  return isa == Isa::scalar || (isa == Isa::avx2 && cpu_has_avx2());
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw ParameterError("kernel ISA not available: " + std::string(isa_name(isa)));
  }
  current().store(isa, std::memory_order_relaxed);
}

const KernelTable& table(Isa isa) {
  if (!isa_available(isa)) {
    throw ParameterError("kernel ISA not available: " + std::string(isa_name(isa)));
  }
#if defined(FHCS_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

const KernelTable& active() noexcept {
#if defined(FHCS_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

void haar_analysis(std::span<const cplx> in, std::span<cplx> approx, std::span<cplx> detail) {
  assert(in.size() == 2 * approx.size() && approx.size() == detail.size());
  active().haar_analysis(in.data(), approx.data(), detail.data(), approx.size());
}

void haar_synthesis(std::span<const cplx> approx, std::span<const cplx> detail,
                    std::span<cplx> out) {
  assert(out.size() == 2 * approx.size() && approx.size() == detail.size());
  active().haar_synthesis(approx.data(), detail.data(), out.data(), approx.size());
}

void butterfly(std::span<cplx> a, std::span<cplx> b, std::span<const cplx> w) {
  assert(a.size() == b.size() && b.size() == w.size());
  active().butterfly(a.data(), b.data(), w.data(), a.size());
}

void soft_threshold(std::span<const cplx> x, std::span<cplx> out, double t) {
  assert(x.size() == out.size());
  active().soft_threshold(x.data(), out.data(), t, x.size());
}

void axpby(double alpha, std::span<const cplx> x, double beta, std::span<const cplx> y,
           std::span<cplx> out) {
  assert(x.size() == y.size() && y.size() == out.size());
  active().axpby(alpha, x.data(), beta, y.data(), out.data(), x.size());
}

void scale(std::span<cplx> x, double s) { active().scale(x.data(), s, x.size()); }

double sq_norm(std::span<const cplx> x) { return active().sq_norm(x.data(), x.size()); }

double norm(std::span<const cplx> x) { return std::sqrt(sq_norm(x)); }

cplx dot(std::span<const cplx> x, std::span<const cplx> y) {
  assert(x.size() == y.size());
  double out[2];
  active().dot(x.data(), y.data(), x.size(), out);
  return {out[0], out[1]};
}

double abs_sum(std::span<const cplx> x) { return active().abs_sum(x.data(), x.size()); }

}  // namespace fhcs::kernels
