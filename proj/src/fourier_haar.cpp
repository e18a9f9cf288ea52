#include "fhcs/fourier_haar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "fhcs/bands.hpp"
#include "fhcs/fft.hpp"
#include "fhcs/haar.hpp"
#include "fhcs/kernels.hpp"
#include "fhcs/numfmt.hpp"

namespace fhcs {
namespace {

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t v = a % m;
  return v < 0 ? v + m : v;
}

/// e^{2 pi i q / period} with q reduced exactly before the angle is formed.
cplx unit_root(std::int64_t q, std::int64_t period) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(positive_mod(q, period)) /
                       static_cast<double>(period);
  return {std::cos(angle), std::sin(angle)};
}

/// 1 - e^{2 pi i q / period} via the half-angle identity 1 - cos x = 2 sin^2(x/2).
cplx one_minus_unit_root(std::int64_t q, std::int64_t period) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(positive_mod(q, period)) /
                       static_cast<double>(period);
  const double s = std::sin(0.5 * angle);
  return {2.0 * s * s, -std::sin(angle)};
}

void check_omega(int omega, int r) {
  const std::int64_t half = std::int64_t{1} << (r - 1);
  if (omega <= -half || omega > half) {
    throw IndexError("frequency " + std::to_string(omega) + " outside (-n/2, n/2] for r = " +
                     std::to_string(r));
  }
}

}  // namespace

cplx fourier_haar_entry(int omega, int level, std::size_t translation, int r) {
  if (r < 1 || r > 30) throw IndexError("invalid number of levels");
  check_omega(omega, r);
  if (level < 0 || level >= r) throw IndexError("level " + std::to_string(level) + " out of range");
  std::size_t p = translation;
  if (level == 0) {
    if (translation > 1) throw IndexError("level 0 has translations 0 (psi) and 1 (phi_00)");
    if (translation == 0) return omega == 0 ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
    p = 0;
  } else if (translation >= (std::size_t{1} << level)) {
    throw IndexError("translation out of range for level " + std::to_string(level));
  }
  if (omega == 0) return {0.0, 0.0};
  const std::int64_t w = omega;
  const cplx shift = unit_root(w * static_cast<std::int64_t>(p), std::int64_t{1} << level);
  const cplx num = one_minus_unit_root(w, std::int64_t{1} << (level + 1));
  const cplx den = one_minus_unit_root(w, std::int64_t{1} << r);
  return std::pow(2.0, 0.5 * level - r) * shift * (num * num) / den;
}

cplx fourier_haar_entry(int omega, std::size_t coefficient_index, int r) {
  if (r < 1 || r > 30) throw IndexError("invalid number of levels");
  const LevelStructure levels(r);
  if (coefficient_index >= levels.n()) throw IndexError("coefficient index out of range");
  const int l = levels.level_of(coefficient_index);
  return fourier_haar_entry(omega, l, coefficient_index - levels.begin(l), r);
}

ChangeOfBasisMatrix::ChangeOfBasisMatrix(LevelStructure levels, DenseMatrix entries)
    : levels_(levels), entries_(std::move(entries)) {
  const std::size_t n = levels_.n();
  if (entries_.rows != n || entries_.cols != n || entries_.data.size() != n * n) {
    throw SizeError("change-of-basis matrix must be n x n");
  }
  const auto bands = build_bands(levels_.r());
  for (const auto& w : bands) {
    std::vector<std::size_t> rows;
    rows.reserve(w.size());
    for (int omega : w) rows.push_back(slot_of_frequency(omega, n));
    band_rows_.push_back(std::move(rows));
  }
}

cplx ChangeOfBasisMatrix::at(int omega, std::size_t i) const {
  if (i >= n()) throw IndexError("column out of range");
  return entries_(slot_of_frequency(omega, n()), i);
}

std::span<const cplx> ChangeOfBasisMatrix::column(std::size_t i) const {
  if (i >= n()) throw IndexError("column out of range");
  return std::span<const cplx>(entries_.data).subspan(i * n(), n());
}

const std::vector<std::size_t>& ChangeOfBasisMatrix::band_rows(int j) const {
  if (j < 0 || j >= levels_.r()) throw IndexError("band out of range");
  return band_rows_[static_cast<std::size_t>(j)];
}

DenseMatrix ChangeOfBasisMatrix::block(int j, int l) const {
  const auto& rows = band_rows(j);
  const std::size_t c0 = levels_.begin(l), cols = levels_.size(l);
  DenseMatrix b{rows.size(), cols, CVec(rows.size() * cols)};
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t i = 0; i < rows.size(); ++i) b(i, c) = entries_(rows[i], c0 + c);
  }
  return b;
}

ChangeOfBasisMatrix build_U(const LevelStructure& levels, BuildMode mode, std::size_t dense_limit) {
  const std::size_t n = levels.n();
  if (n > dense_limit) {
    throw CapacityError("dense change-of-basis matrix requested for n = " + std::to_string(n) +
                        " above the limit " + std::to_string(dense_limit));
  }
  DenseMatrix u{n, n, CVec(n * n, cplx{0.0, 0.0})};
  if (mode == BuildMode::analytic) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t s = 0; s < n; ++s) {
        u(s, i) = fourier_haar_entry(frequency_of_slot(s, n), i, levels.r());
      }
    }
  } else {
    // Dense F from the defining sum, with omega * t reduced mod n.
    DenseMatrix f{n, n, CVec(n * n)};
    const double norm = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t s = 0; s < n; ++s) {
        const std::int64_t q = static_cast<std::int64_t>(frequency_of_slot(s, n)) *
                               static_cast<std::int64_t>(t);
        f(s, t) = unit_root(q, static_cast<std::int64_t>(n)) * norm;
      }
    }
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < n; ++i) {
      const RVec atom = haar_atom(n, i);
      cplx* col = u.data.data() + i * n;
      for (std::size_t t = 0; t < n; ++t) {
        if (atom[t] != 0.0) k.axpby(1.0, col, atom[t], f.data.data() + t * n, col, n);
      }
    }
  }
  return ChangeOfBasisMatrix(levels, std::move(u));
}

double unitarity_error(const ChangeOfBasisMatrix& u) {
  const std::size_t n = u.n();
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const cplx g = kernels::dot(u.column(a), u.column(b));
      worst = std::max(worst, std::abs(g - (a == b ? cplx{1.0, 0.0} : cplx{0.0, 0.0})));
    }
  }
  return worst;
}

double max_entry_difference(const ChangeOfBasisMatrix& a, const ChangeOfBasisMatrix& b) {
  if (a.n() != b.n()) throw SizeError("matrices differ in size");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.dense().data.size(); ++i) {
    worst = std::max(worst, std::abs(a.dense().data[i] - b.dense().data[i]));
  }
  return worst;
}

void write_csv(std::ostream& os, const ChangeOfBasisMatrix& u,
               std::optional<std::pair<int, int>> block) {
  const std::size_t n = u.n();
  const auto& levels = u.levels();
  os << "omega,column,real,imag\n";
  std::size_t c0 = 0, c1 = n;
  std::vector<std::size_t> rows;
  if (block) {
    rows = u.band_rows(block->first);
    c0 = levels.begin(block->second);
    c1 = levels.end(block->second);
  } else {
    for (std::size_t s = 0; s < n; ++s) rows.push_back(s);
  }
  for (std::size_t s : rows) {
    for (std::size_t c = c0; c < c1; ++c) {
      const cplx v = u.dense()(s, c);
      os << frequency_of_slot(s, n) << ',' << c << ',' << format_double(v.real()) << ','
         << format_double(v.imag()) << '\n';
    }
  }
}

}  // namespace fhcs
