#pragma once

// Inner-loop kernels shared by the transforms and the solver.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is chosen once at runtime from CPUID; FHCS_SIMD=scalar
// in the environment (or force_isa) pins the scalar path. Elementwise kernels
// produce bit-identical results on both paths. Reductions (sq_norm, dot,
// abs_sum) use a different summation order on AVX2 and agree to rounding.

#include <cstddef>
#include <span>
#include <string_view>

#include "fhcs/types.hpp"

namespace fhcs::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;
bool isa_available(Isa isa) noexcept;

/// ISA used by the free functions below.
Isa active_isa() noexcept;

/// Overrides the runtime choice; throws ParameterError if the ISA is not
/// available on this machine. Not meant to be toggled while kernels run.
void force_isa(Isa isa);

struct KernelTable {
  // approx[i] = (in[2i] + in[2i+1]) / sqrt2, detail[i] = (in[2i] - in[2i+1]) / sqrt2
  void (*haar_analysis)(const cplx* in, cplx* approx, cplx* detail, std::size_t half);
  // out[2i] = (approx[i] + detail[i]) / sqrt2, out[2i+1] = (approx[i] - detail[i]) / sqrt2
  void (*haar_synthesis)(const cplx* approx, const cplx* detail, cplx* out, std::size_t half);
  // t = b[i] * w[i]; b[i] = a[i] - t; a[i] = a[i] + t
  void (*butterfly)(cplx* a, cplx* b, const cplx* w, std::size_t len);
  // out[i] = x[i] * max(|x[i]| - t, 0) / |x[i]|
  void (*soft_threshold)(const cplx* x, cplx* out, double t, std::size_t len);
  // out[i] = alpha * x[i] + beta * y[i]
  void (*axpby)(double alpha, const cplx* x, double beta, const cplx* y, cplx* out,
                std::size_t len);
  // x[i] *= s
  void (*scale)(cplx* x, double s, std::size_t len);
  double (*sq_norm)(const cplx* x, std::size_t len);
  // out[0] + i out[1] = sum conj(x[i]) * y[i]
  void (*dot)(const cplx* x, const cplx* y, std::size_t len, double* out);
  // sum |x[i]|
  double (*abs_sum)(const cplx* x, std::size_t len);
};

const KernelTable& table(Isa isa);
const KernelTable& active() noexcept;

// Span wrappers over the active table. Sizes are the caller's contract; they
// are checked only in debug builds.

void haar_analysis(std::span<const cplx> in, std::span<cplx> approx, std::span<cplx> detail);
void haar_synthesis(std::span<const cplx> approx, std::span<const cplx> detail,
                    std::span<cplx> out);
void butterfly(std::span<cplx> a, std::span<cplx> b, std::span<const cplx> w);
void soft_threshold(std::span<const cplx> x, std::span<cplx> out, double t);
void axpby(double alpha, std::span<const cplx> x, double beta, std::span<const cplx> y,
           std::span<cplx> out);
void scale(std::span<cplx> x, double s);
double sq_norm(std::span<const cplx> x);
double norm(std::span<const cplx> x);
cplx dot(std::span<const cplx> x, std::span<const cplx> y);
double abs_sum(std::span<const cplx> x);

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(FHCS_HAVE_AVX2)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

}  // namespace fhcs::kernels
