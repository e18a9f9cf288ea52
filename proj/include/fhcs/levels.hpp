#pragma once

// Dyadic level bookkeeping for Haar coefficient vectors.
//
// A coefficient vector of length n = 2^r is split into r levels. Level 0 holds
// the scaling coefficient and the coarsest wavelet (2 entries); level j >= 1
// holds the 2^j wavelets at scale j. Indices are 0-based: level j occupies
// [M_j, M_{j+1}) with M_0 = 0 and M_j = 2^j, which is the 1-based range
// {M_j + 1, ..., M_{j+1}} shifted down by one.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fhcs/types.hpp"

namespace fhcs {

class LevelStructure {
 public:
  /// r >= 1 levels, n = 2^r.
  explicit LevelStructure(int r);
  /// Throws SizeError unless n is a power of two >= 2.
  static LevelStructure from_size(std::size_t n);

  int r() const noexcept { return r_; }
  std::size_t n() const noexcept { return std::size_t{1} << r_; }
  /// M_j for j = 0..r.
  std::size_t boundary(int j) const;
  std::size_t begin(int j) const { return boundary(j); }
  std::size_t end(int j) const { return boundary(j + 1); }
  std::size_t size(int j) const { return end(j) - begin(j); }
  /// Level containing 0-based coefficient index i.
  int level_of(std::size_t i) const;

  friend bool operator==(const LevelStructure&, const LevelStructure&) = default;

 private:
  void check_level(int j) const;
  int r_;
};

/// Per-level sparsities k_0, ..., k_{r-1}.
class SparsityPattern {
 public:
  SparsityPattern() = default;
  /// Throws ParameterError if any k_j is negative or exceeds the level size.
  SparsityPattern(const LevelStructure& levels, std::vector<int> k);

  const std::vector<int>& k() const noexcept { return k_; }
  int operator[](int j) const { return k_.at(static_cast<std::size_t>(j)); }
  int levels() const noexcept { return static_cast<int>(k_.size()); }
  int total() const noexcept;

 private:
  std::vector<int> k_;
};

/// View of level j of c.
std::span<const cplx> level_slice(std::span<const cplx> c, const LevelStructure& levels, int j);

/// Best (k,M)-term approximation: keeps the k_j largest-magnitude entries in
/// each level, ties broken by lowest index.
CVec project_sparse_in_levels(std::span<const cplx> c, const LevelStructure& levels,
                              const SparsityPattern& k);

/// sigma_{k,M}(c)_1 = || c - project_sparse_in_levels(c, k) ||_1.
double sigma_km(std::span<const cplx> c, const LevelStructure& levels, const SparsityPattern& k);

/// Number of nonzeros per level.
std::vector<int> level_nonzeros(std::span<const cplx> c, const LevelStructure& levels);

enum class MagnitudeLaw {
  unit_modulus,  // e^{i theta}, theta uniform
  gaussian,      // standard complex Gaussian
};

/// Exactly k_j nonzeros in level j on a uniformly drawn support.
CVec random_sparse_in_levels(const LevelStructure& levels, const SparsityPattern& k,
                             std::uint64_t seed, MagnitudeLaw law = MagnitudeLaw::unit_modulus);

}  // namespace fhcs
