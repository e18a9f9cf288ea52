#pragma once

// Dyadic frequency bands and multilevel random subsampling.
//
// Frequencies {-n/2+1, ..., n/2} split into r disjoint bands:
//   W_0 = {0, 1},
//   W_j = {-2^j+1, ..., -2^{j-1}} u {2^{j-1}+1, ..., 2^j},   j = 1..r-1,
// with |W_0| = 2 and |W_j| = 2^j. Each band j is sampled uniformly without
// replacement with budget m_j.

#include <cstdint>
#include <vector>

#include "fhcs/levels.hpp"

namespace fhcs {

/// W_0, ..., W_{r-1}, each in ascending order.
std::vector<std::vector<int>> build_bands(int r);

std::size_t band_size(int j);
/// Band index of omega (omega must be in range for some n).
int band_of_frequency(int omega);

struct AllocationParams {
  double c_alloc = 1.0;
  /// Failure parameter in (0, 1/e].
  double epsilon = 0.36787944117144233;
};

/// Unclamped theory value per band:
///   c_alloc * (k_j + sum_{l != j} 2^{-|j-l|/2} k_l) * ln(1/epsilon) * log2(n).
std::vector<double> allocation_theory(const SparsityPattern& k, const AllocationParams& params,
                                      std::size_t n);

/// m_j = min(|W_j|, max(k != 0 ? 1 : 0, ceil(theory_j))). The floor follows
/// the unscaled expression, so c_alloc = 0 gives one sample per band.
/// Throws ParameterError for epsilon outside (0, 1/e] or c_alloc < 0.
std::vector<int> allocate_budgets(const SparsityPattern& k, const AllocationParams& params,
                                  std::size_t n);

struct BandPlan {
  int r = 0;
  std::vector<int> budgets;  // m_j = |Omega_j|
  std::vector<int> omega;    // sampled frequencies, ascending
  std::uint64_t seed = 0;

  std::size_t n() const noexcept { return std::size_t{1} << r; }
  std::size_t m() const noexcept { return omega.size(); }
};

/// Draws Omega_j from W_j for every band. Band j uses the substream
/// derive_seed(seed, j). Throws ParameterError if a budget is negative or
/// exceeds |W_j|.
BandPlan draw_omega(int r, const std::vector<int>& budgets, std::uint64_t seed);

/// All n frequencies.
BandPlan full_plan(int r);

/// m frequencies drawn uniformly from the whole range (no band structure);
/// budgets record how many fell into each band.
BandPlan draw_uniform_global(int r, std::size_t m, std::uint64_t seed);

/// Throws ParameterError if the plan violates any band invariant.
void validate(const BandPlan& plan);

}  // namespace fhcs
