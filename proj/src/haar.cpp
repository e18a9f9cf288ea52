#include "fhcs/haar.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fhcs/kernels.hpp"
#include "fhcs/levels.hpp"

namespace fhcs {
namespace {

void check(std::size_t n) {
  if (n < 2 || !is_power_of_two(n)) {
    throw SizeError("Haar transform length must be a power of two >= 2, got " + std::to_string(n));
  }
}

}  // namespace

void haar_forward(std::span<const cplx> x, std::span<cplx> out, std::span<cplx> work) {
  const std::size_t n = x.size();
  check(n);
  if (out.size() != n || work.size() < n) throw SizeError("Haar output/workspace size mismatch");
  std::copy(x.begin(), x.end(), work.begin());
  for (std::size_t len = n; len >= 2; len /= 2) {
    const std::size_t half = len / 2;
    kernels::haar_analysis(work.first(len), out.first(half), out.subspan(half, half));
    std::copy_n(out.begin(), half, work.begin());
  }
}

void haar_inverse(std::span<const cplx> c, std::span<cplx> out, std::span<cplx> work) {
  const std::size_t n = c.size();
  check(n);
  if (out.size() != n || work.size() < n) throw SizeError("Haar output/workspace size mismatch");
  work[0] = c[0];
  for (std::size_t len = 2; len <= n; len *= 2) {
    const std::size_t half = len / 2;
    kernels::haar_synthesis(work.first(half), c.subspan(half, half), out.first(len));
    if (len < n) std::copy_n(out.begin(), len, work.begin());
  }
}

CVec haar_forward(std::span<const cplx> x) {
  check(x.size());
  CVec out(x.size()), work(x.size());
  haar_forward(x, out, work);
  return out;
}

CVec haar_inverse(std::span<const cplx> c) {
  check(c.size());
  CVec out(c.size()), work(c.size());
  haar_inverse(c, out, work);
  return out;
}

RVec haar_atom(std::size_t n, std::size_t coefficient_index) {
  const LevelStructure levels = LevelStructure::from_size(n);
  const int r = levels.r();
  RVec atom(n, 0.0);
  if (coefficient_index == 0) {
    std::fill(atom.begin(), atom.end(), std::pow(2.0, -0.5 * r));
    return atom;
  }
  const int j = coefficient_index == 1 ? 0 : levels.level_of(coefficient_index);
  const std::size_t p = coefficient_index == 1 ? 0 : coefficient_index - (std::size_t{1} << j);
  const std::size_t width = std::size_t{1} << (r - j);
  const double amp = std::pow(2.0, 0.5 * (j - r));
  for (std::size_t t = p * width; t < (p + 1) * width; ++t) {
    atom[t] = t < p * width + width / 2 ? amp : -amp;
  }
  return atom;
}

}  // namespace fhcs
