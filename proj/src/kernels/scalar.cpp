// Scalar reference kernels. The AVX2 variants mirror the exact operation
// order used here for every elementwise kernel.

#include <cmath>

#include "fhcs/kernels.hpp"
#include "kernel_constants.hpp"

namespace fhcs::kernels::detail {
namespace {

void haar_analysis(const cplx* in, cplx* approx, cplx* detail, std::size_t half) {
  const double* s = reinterpret_cast<const double*>(in);
  double* a = reinterpret_cast<double*>(approx);
  double* d = reinterpret_cast<double*>(detail);
  for (std::size_t i = 0; i < half; ++i) {
    const double* p = s + 4 * i;
    a[2 * i] = (p[0] + p[2]) * kInvSqrt2;
    a[2 * i + 1] = (p[1] + p[3]) * kInvSqrt2;
    d[2 * i] = (p[0] - p[2]) * kInvSqrt2;
    d[2 * i + 1] = (p[1] - p[3]) * kInvSqrt2;
  }
}

void haar_synthesis(const cplx* approx, const cplx* detail, cplx* out, std::size_t half) {
  const double* a = reinterpret_cast<const double*>(approx);
  const double* d = reinterpret_cast<const double*>(detail);
  double* o = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < half; ++i) {
    o[4 * i] = (a[2 * i] + d[2 * i]) * kInvSqrt2;
    o[4 * i + 1] = (a[2 * i + 1] + d[2 * i + 1]) * kInvSqrt2;
    o[4 * i + 2] = (a[2 * i] - d[2 * i]) * kInvSqrt2;
    o[4 * i + 3] = (a[2 * i + 1] - d[2 * i + 1]) * kInvSqrt2;
  }
}

void butterfly(cplx* a, cplx* b, const cplx* w, std::size_t len) {
  double* pa = reinterpret_cast<double*>(a);
  double* pb = reinterpret_cast<double*>(b);
  const double* pw = reinterpret_cast<const double*>(w);
  for (std::size_t i = 0; i < len; ++i) {
    const double br = pb[2 * i], bi = pb[2 * i + 1];
    const double wr = pw[2 * i], wi = pw[2 * i + 1];
    const double tr = br * wr - bi * wi;
    const double ti = bi * wr + br * wi;
    const double ar = pa[2 * i], ai = pa[2 * i + 1];
    pb[2 * i] = ar - tr;
    pb[2 * i + 1] = ai - ti;
    pa[2 * i] = ar + tr;
    pa[2 * i + 1] = ai + ti;
  }
}

void soft_threshold(const cplx* x, cplx* out, double t, std::size_t len) {
  const double* px = reinterpret_cast<const double*>(x);
  double* po = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < len; ++i) {
    const double re = px[2 * i], im = px[2 * i + 1];
    const double mag = std::sqrt(re * re + im * im);
    const double f = mag > t ? (mag - t) / mag : 0.0;
    po[2 * i] = re * f;
    po[2 * i + 1] = im * f;
  }
}

void axpby(double alpha, const cplx* x, double beta, const cplx* y, cplx* out,
           std::size_t len) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  double* po = reinterpret_cast<double*>(out);
  for (std::size_t i = 0; i < 2 * len; ++i) po[i] = alpha * px[i] + beta * py[i];
}

void scale(cplx* x, double s, std::size_t len) {
  double* p = reinterpret_cast<double*>(x);
  for (std::size_t i = 0; i < 2 * len; ++i) p[i] *= s;
}

double sq_norm(const cplx* x, std::size_t len) {
  const double* p = reinterpret_cast<const double*>(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < 2 * len; ++i) acc += p[i] * p[i];
  return acc;
}

void dot(const cplx* x, const cplx* y, std::size_t len, double* out) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double xr = px[2 * i], xi = px[2 * i + 1];
    const double yr = py[2 * i], yi = py[2 * i + 1];
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  out[0] = re;
  out[1] = im;
}

double abs_sum(const cplx* x, std::size_t len) {
  const double* p = reinterpret_cast<const double*>(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    acc += std::sqrt(p[2 * i] * p[2 * i] + p[2 * i + 1] * p[2 * i + 1]);
  }
  return acc;
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{haar_analysis, haar_synthesis, butterfly, soft_threshold,
                                 axpby,         scale,          sq_norm,   dot,
                                 abs_sum};
  return table;
}

}  // namespace fhcs::kernels::detail
