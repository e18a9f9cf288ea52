#include "fhcs/levels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "fhcs/rng.hpp"

namespace fhcs {

LevelStructure::LevelStructure(int r) : r_(r) {
  if (r < 1 || r > 30) throw SizeError("number of levels must be in [1, 30], got " + std::to_string(r));
}

LevelStructure LevelStructure::from_size(std::size_t n) {
  if (n < 2 || !is_power_of_two(n)) {
    throw SizeError("length must be a power of two >= 2, got " + std::to_string(n));
  }
  return LevelStructure(ilog2(n));
}

void LevelStructure::check_level(int j) const {
  if (j < 0 || j >= r_) {
    throw IndexError("level " + std::to_string(j) + " out of range [0, " + std::to_string(r_) + ")");
  }
}

std::size_t LevelStructure::boundary(int j) const {
  if (j < 0 || j > r_) throw IndexError("boundary index " + std::to_string(j) + " out of range");
  return j == 0 ? 0 : std::size_t{1} << j;
}

int LevelStructure::level_of(std::size_t i) const {
  if (i >= n()) throw IndexError("coefficient index out of range");
  return i < 2 ? 0 : ilog2(i + 1) - 1;
}

SparsityPattern::SparsityPattern(const LevelStructure& levels, std::vector<int> k)
    : k_(std::move(k)) {
  if (static_cast<int>(k_.size()) != levels.r()) {
    throw ParameterError("sparsity pattern has " + std::to_string(k_.size()) +
                         " entries, expected " + std::to_string(levels.r()));
  }
  for (int j = 0; j < levels.r(); ++j) {
    const int kj = k_[static_cast<std::size_t>(j)];
    if (kj < 0 || static_cast<std::size_t>(kj) > levels.size(j)) {
      throw ParameterError("k_" + std::to_string(j) + " = " + std::to_string(kj) +
                           " outside [0, " + std::to_string(levels.size(j)) + "]");
    }
  }
}

int SparsityPattern::total() const noexcept { return std::accumulate(k_.begin(), k_.end(), 0); }

namespace {

void check_length(std::span<const cplx> c, const LevelStructure& levels) {
  if (c.size() != levels.n()) {
    throw SizeError("coefficient vector has length " + std::to_string(c.size()) + ", expected " +
                    std::to_string(levels.n()));
  }
}

void check_pattern(const LevelStructure& levels, const SparsityPattern& k) {
  if (k.levels() != levels.r()) throw ParameterError("sparsity pattern does not match levels");
}

}  // namespace

std::span<const cplx> level_slice(std::span<const cplx> c, const LevelStructure& levels, int j) {
  check_length(c, levels);
  return c.subspan(levels.begin(j), levels.size(j));
}

CVec project_sparse_in_levels(std::span<const cplx> c, const LevelStructure& levels,
                              const SparsityPattern& k) {
  check_length(c, levels);
  check_pattern(levels, k);
  CVec out(c.size(), cplx{0.0, 0.0});
  std::vector<std::size_t> order;
  for (int j = 0; j < levels.r(); ++j) {
    const std::size_t b = levels.begin(j);
    order.resize(levels.size(j));
    std::iota(order.begin(), order.end(), b);
    const auto keep = static_cast<std::size_t>(k[j]);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t z) {
                        const double ma = std::abs(c[a]), mz = std::abs(c[z]);
                        return ma > mz || (ma == mz && a < z);
                      });
    for (std::size_t i = 0; i < keep; ++i) out[order[i]] = c[order[i]];
  }
  return out;
}

double sigma_km(std::span<const cplx> c, const LevelStructure& levels, const SparsityPattern& k) {
  const CVec z = project_sparse_in_levels(c, levels, k);
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += std::abs(c[i] - z[i]);
  return acc;
}

std::vector<int> level_nonzeros(std::span<const cplx> c, const LevelStructure& levels) {
  check_length(c, levels);
  std::vector<int> counts(static_cast<std::size_t>(levels.r()), 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] != cplx{0.0, 0.0}) ++counts[static_cast<std::size_t>(levels.level_of(i))];
  }
  return counts;
}

CVec random_sparse_in_levels(const LevelStructure& levels, const SparsityPattern& k,
                             std::uint64_t seed, MagnitudeLaw law) {
  check_pattern(levels, k);
  Rng rng(seed);
  CVec c(levels.n(), cplx{0.0, 0.0});
  for (int j = 0; j < levels.r(); ++j) {
    const auto support =
        sample_without_replacement(rng, levels.size(j), static_cast<std::size_t>(k[j]));
    for (std::size_t p : support) {
      cplx value;
      if (law == MagnitudeLaw::unit_modulus) {
        value = std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform());
      } else {
        const double re = rng.normal();
        const double im = rng.normal();
        value = cplx{re, im} * (0.5 * std::numbers::sqrt2);
      }
      c[levels.begin(j) + p] = value;
    }
  }
  return c;
}

}  // namespace fhcs
