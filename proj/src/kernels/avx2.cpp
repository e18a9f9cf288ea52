// AVX2 kernels. This translation unit is the only one compiled with -mavx2;
// it must not instantiate library templates, only intrinsics on raw doubles.
// Tails shorter than one vector fall through to the scalar kernels so the
// elementwise results stay bit-identical to the reference path.

#include <immintrin.h>

#include "fhcs/kernels.hpp"
#include "kernel_constants.hpp"

namespace fhcs::kernels::detail {
namespace {

const KernelTable& ref() noexcept { return scalar_table(); }

void haar_analysis(const cplx* in, cplx* approx, cplx* detail, std::size_t half) {
  const double* s = reinterpret_cast<const double*>(in);
  double* a = reinterpret_cast<double*>(approx);
  double* d = reinterpret_cast<double*>(detail);
  const __m256d k = _mm256_set1_pd(kInvSqrt2);
  std::size_t i = 0;
  for (; i + 2 <= half; i += 2) {
    const __m256d v0 = _mm256_loadu_pd(s + 4 * i);
    const __m256d v1 = _mm256_loadu_pd(s + 4 * i + 4);
    const __m256d even = _mm256_permute2f128_pd(v0, v1, 0x20);
    const __m256d odd = _mm256_permute2f128_pd(v0, v1, 0x31);
    _mm256_storeu_pd(a + 2 * i, _mm256_mul_pd(_mm256_add_pd(even, odd), k));
    _mm256_storeu_pd(d + 2 * i, _mm256_mul_pd(_mm256_sub_pd(even, odd), k));
  }
  if (i < half) ref().haar_analysis(in + 2 * i, approx + i, detail + i, half - i);
}

void haar_synthesis(const cplx* approx, const cplx* detail, cplx* out, std::size_t half) {
  const double* a = reinterpret_cast<const double*>(approx);
  const double* d = reinterpret_cast<const double*>(detail);
  double* o = reinterpret_cast<double*>(out);
  const __m256d k = _mm256_set1_pd(kInvSqrt2);
  std::size_t i = 0;
  for (; i + 2 <= half; i += 2) {
    const __m256d va = _mm256_loadu_pd(a + 2 * i);
    const __m256d vd = _mm256_loadu_pd(d + 2 * i);
    const __m256d sum = _mm256_mul_pd(_mm256_add_pd(va, vd), k);
    const __m256d diff = _mm256_mul_pd(_mm256_sub_pd(va, vd), k);
    _mm256_storeu_pd(o + 4 * i, _mm256_permute2f128_pd(sum, diff, 0x20));
    _mm256_storeu_pd(o + 4 * i + 4, _mm256_permute2f128_pd(sum, diff, 0x31));
  }
  if (i < half) ref().haar_synthesis(approx + i, detail + i, out + 2 * i, half - i);
}

inline __m256d cmul(__m256d b, __m256d w) {
  const __m256d wr = _mm256_movedup_pd(w);
  const __m256d wi = _mm256_permute_pd(w, 0xF);
  const __m256d bs = _mm256_permute_pd(b, 0x5);
  return _mm256_addsub_pd(_mm256_mul_pd(b, wr), _mm256_mul_pd(bs, wi));
}

void butterfly(cplx* a, cplx* b, const cplx* w, std::size_t len) {
  double* pa = reinterpret_cast<double*>(a);
  double* pb = reinterpret_cast<double*>(b);
  const double* pw = reinterpret_cast<const double*>(w);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d t = cmul(_mm256_loadu_pd(pb + 2 * i), _mm256_loadu_pd(pw + 2 * i));
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    _mm256_storeu_pd(pb + 2 * i, _mm256_sub_pd(va, t));
    _mm256_storeu_pd(pa + 2 * i, _mm256_add_pd(va, t));
  }
  if (i < len) ref().butterfly(a + i, b + i, w + i, len - i);
}

void soft_threshold(const cplx* x, cplx* out, double t, std::size_t len) {
  const double* px = reinterpret_cast<const double*>(x);
  double* po = reinterpret_cast<double*>(out);
  const __m256d vt = _mm256_set1_pd(t);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d v = _mm256_loadu_pd(px + 2 * i);
    const __m256d sq = _mm256_mul_pd(v, v);
    const __m256d mag = _mm256_sqrt_pd(_mm256_hadd_pd(sq, sq));
    const __m256d f = _mm256_div_pd(_mm256_sub_pd(mag, vt), mag);
    const __m256d keep = _mm256_cmp_pd(mag, vt, _CMP_GT_OQ);
    _mm256_storeu_pd(po + 2 * i, _mm256_mul_pd(v, _mm256_and_pd(keep, f)));
  }
  if (i < len) ref().soft_threshold(x + i, out + i, t, len - i);
}

void axpby(double alpha, const cplx* x, double beta, const cplx* y, cplx* out,
           std::size_t len) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  double* po = reinterpret_cast<double*>(out);
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(px + 2 * i)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(py + 2 * i)));
    _mm256_storeu_pd(po + 2 * i, r);
  }
  if (i < len) ref().axpby(alpha, x + i, beta, y + i, out + i, len - i);
}

void scale(cplx* x, double s, std::size_t len) {
  double* p = reinterpret_cast<double*>(x);
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    _mm256_storeu_pd(p + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(p + 2 * i), vs));
  }
  if (i < len) ref().scale(x + i, s, len - i);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sq_norm(const cplx* x, std::size_t len) {
  const double* p = reinterpret_cast<const double*>(x);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d v0 = _mm256_loadu_pd(p + 2 * i);
    const __m256d v1 = _mm256_loadu_pd(p + 2 * i + 4);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(v0, v0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(v1, v1));
  }
  double total = hsum(_mm256_add_pd(acc0, acc1));
  if (i < len) total += ref().sq_norm(x + i, len - i);
  return total;
}

void dot(const cplx* x, const cplx* y, std::size_t len, double* out) {
  const double* px = reinterpret_cast<const double*>(x);
  const double* py = reinterpret_cast<const double*>(y);
  // re_acc lanes hold xr*yr and xi*yi; im_acc lanes hold xr*yi and xi*yr.
  __m256d re_acc = _mm256_setzero_pd();
  __m256d im_acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d vy = _mm256_loadu_pd(py + 2 * i);
    re_acc = _mm256_add_pd(re_acc, _mm256_mul_pd(vx, vy));
    im_acc = _mm256_add_pd(im_acc, _mm256_mul_pd(vx, _mm256_permute_pd(vy, 0x5)));
  }
  alignas(32) double r[4];
  alignas(32) double m[4];
  _mm256_store_pd(r, re_acc);
  _mm256_store_pd(m, im_acc);
  double re = (r[0] + r[1]) + (r[2] + r[3]);
  double im = (m[0] - m[1]) + (m[2] - m[3]);
  if (i < len) {
    double tail[2];
    ref().dot(x + i, y + i, len - i, tail);
    re += tail[0];
    im += tail[1];
  }
  out[0] = re;
  out[1] = im;
}

double abs_sum(const cplx* x, std::size_t len) {
  const double* p = reinterpret_cast<const double*>(x);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= len; i += 2) {
    const __m256d v = _mm256_loadu_pd(p + 2 * i);
    const __m256d sq = _mm256_mul_pd(v, v);
    // Both lanes of each 128-bit half hold the same modulus; count it once.
    acc = _mm256_add_pd(acc, _mm256_sqrt_pd(_mm256_hadd_pd(sq, sq)));
  }
  double total = 0.5 * hsum(acc);
  if (i < len) total += ref().abs_sum(x + i, len - i);
  return total;
}

}  // namespace

const KernelTable& avx2_table() noexcept {
  static const KernelTable table{haar_analysis, haar_synthesis, butterfly, soft_threshold,
                                 axpby,         scale,          sq_norm,   dot,
                                 abs_sum};
  return table;
}

}  // namespace fhcs::kernels::detail
