#pragma once

// Coherence and relative-sparsity analysis of U = F Phi.
//
// All quantities are indexed by (band j, level l), both in 0..r-1:
//   mu_block(j,l)   = max |entry of U_jl|^2
//   mu_local(j,l)   = sqrt(mu_block(j,l)) * max_l' sqrt(mu_block(j,l'))
//   block_norm(j,l) = ||U_jl||_2
//   K_j             = max { ||sum_l U_jl z^(l)||_2^2 : z (k,M)-sparse, ||z||_inf <= 1 }
//
// Constants hidden in the decay laws are reported as fitted numbers:
//   coherence:  max_{j,l} mu_local(j,l) 2^j 2^{|j-l|/2}
//   block norm: max_{j,l} ||U_jl||_2 2^{|j-l|/2}

#include <cstdint>
#include <limits>
#include <vector>

#include "fhcs/fourier_haar.hpp"
#include "fhcs/levels.hpp"

namespace fhcs {

/// r x r table of doubles indexed (band j, level l).
struct LevelTable {
  int r = 0;
  RVec values;

  LevelTable() = default;
  explicit LevelTable(int levels) : r(levels), values(static_cast<std::size_t>(levels * levels), 0.0) {}
  double& operator()(int j, int l) { return values[static_cast<std::size_t>(j * r + l)]; }
  double operator()(int j, int l) const { return values[static_cast<std::size_t>(j * r + l)]; }
};

// ---------------------------------------------------------------------------
// Coherences

struct Coherences {
  LevelTable mu_block;
  LevelTable mu_local;
};

Coherences local_coherences(const ChangeOfBasisMatrix& u);
/// mu_local from a mu_block table.
LevelTable local_from_block(const LevelTable& mu_block);

double coherence_decay_constant(const LevelTable& mu_local);

// ---------------------------------------------------------------------------
// Block norms

enum class SpectralMethod {
  lanczos,  // Krylov space of the power iterates, full reorthogonalization
  power,    // plain power iteration
};

struct PowerIterationOptions {
  /// lanczos: Ritz residual <= tol * theta; power: relative eigenvalue change <= tol.
  double tol = 1e-10;
  int max_iter = 20000;
  SpectralMethod method = SpectralMethod::lanczos;
};

struct SpectralNorm {
  double value = 0.0;
  int iterations = 0;
  double residual = 0.0;  // ||B^*B v - theta v|| estimate at exit
};

/// ||B||_2 from the largest eigenvalue of B^* B, iterating from a fixed
/// deterministic start vector. Throws NumericError (with the residual) if
/// max_iter is reached.
SpectralNorm spectral_norm(const DenseMatrix& b, const PowerIterationOptions& opts = {});

LevelTable block_norms(const ChangeOfBasisMatrix& u, const PowerIterationOptions& opts = {});

double block_norm_decay_constant(const LevelTable& block_norm);

// ---------------------------------------------------------------------------
// Relative sparsities

struct RelativeSparsityOptions {
  int phase_grid = 16;          // phases per support coordinate
  bool refine = true;           // also evaluate with 2 * phase_grid
  double log2_work_cap = 26.0;  // cap on log2(#supports * grid^(s-1)) at the finest grid
  unsigned threads = 1;
};

struct RelativeSparsityExact {
  RVec K;                // at phase_grid
  RVec K_refined;        // at 2 * phase_grid (empty if refine = false)
  RVec relative_change;  // |K_refined - K| / K, 0 where K = 0
  int phase_grid = 0;
  std::uint64_t evaluations = 0;
};

/// Enumerates every level-respecting support of sizes k_l and every phase
/// pattern on the grid (first support phase fixed; the objective is invariant
/// under a global phase). The unit-modulus points are the extreme points of
/// the complex sup-norm ball on a support, and the objective is convex, so
/// the grid maximum converges to K_j from below.
/// Throws CapacityError when the enumeration exceeds the work cap.
RelativeSparsityExact relative_sparsity_exact(const ChangeOfBasisMatrix& u, const SparsityPattern& k,
                                              const RelativeSparsityOptions& opts = {});

struct RelativeSparsityBound {
  RVec block_norm_bound;   // (sum_l ||U_jl|| sqrt(k_l))^2
  RVec decay_expression;   // sum_l 2^{-|j-l|/2} k_l
  RVec decay_bound;        // decay_constant * decay_expression
  double decay_constant = 0.0;
};

/// decay_constant = C^2 * max_j sum_l 2^{-|j-l|/2} with C the block-norm fit,
/// which makes block_norm_bound <= decay_bound hold by Cauchy-Schwarz.
RelativeSparsityBound relative_sparsity_bound(const LevelTable& block_norm, const SparsityPattern& k);

/// sum_j 2^{-|j-l|/2} over j = 0..r-1.
double geometric_decay_sum(int r, int l);
/// Limit of the above as r -> infinity: 1 + 2 / (sqrt2 - 1) = 3 + 2 sqrt2.
inline constexpr double kGeometricDecayLimit = 5.8284271247461900976;

// ---------------------------------------------------------------------------
// Recovery conditions

struct CoherenceProfile {
  std::size_t n = 0;
  std::vector<int> k;
  LevelTable mu_block;
  LevelTable mu_local;
  LevelTable block_norm;
  RVec K;
  bool K_exact = false;  // false: K holds the block-norm bound
  double coherence_constant = 0.0;
  double block_norm_constant = 0.0;
};

struct ComputeProfileOptions {
  PowerIterationOptions power;
  RelativeSparsityOptions sparsity;
  /// Use the exact enumeration when n <= this and the enumeration fits the
  /// work cap, else the block-norm bound.
  std::size_t exact_k_max_n = 16;
};

CoherenceProfile compute_profile(const ChangeOfBasisMatrix& u, const SparsityPattern& k,
                                 const ComputeProfileOptions& opts = {});

inline constexpr double kUnboundedMargin = std::numeric_limits<double>::infinity();

struct BandCheck {
  int band = 0;
  int budget = 0;
  double required = 0.0;
  bool pass = false;
  double margin = 0.0;  // budget / required; kUnboundedMargin when required = 0
};

struct ConditionIReport {
  std::vector<BandCheck> bands;
  bool pass = false;
};

/// m_j >= C_test |W_j| (sum_l mu_local(j,l) k_l) ln(1/eps) log2(n) for every j.
ConditionIReport check_condition_i(const CoherenceProfile& profile, const std::vector<int>& budgets,
                                   double epsilon, std::size_t n, double c_test);

enum class TildeSearch {
  grid,     // regular grid over the k-tilde polytope
  extreme,  // vertices of the k-tilde polytope
};

struct ConditionIIReport {
  bool pass = false;
  bool vacuous = false;    // sum k = 0: no admissible k-tilde
  double margin = 0.0;     // min over candidates and bands of m_j / required_j
  int worst_l = -1;        // level maximizing the inequality sum at the worst candidate
  RVec worst_tilde_k;
  RVec worst_tilde_m;
  double worst_kappa = 0.0;       // m-tilde = min(|W_j|, kappa k-tilde_j)
  double worst_ineq_value = 0.0;  // inequality sum at worst_l (<= 1 by construction of kappa)
  std::vector<double> required;   // C_test m-tilde_j ln(1/eps) log2(n) at the worst candidate
  std::size_t candidates_tested = 0;
  TildeSearch search = TildeSearch::extreme;
  /// max over candidates of the inequality sum with m~_j = min(|W_j|, k~_j),
  /// i.e. kappa = 1. Bounded in r when the coherence decay law holds.
  double unit_choice_max = 0.0;
};

/// For each candidate k-tilde in {0 <= k~_j <= K_j, sum k~_j <= sum k_j}, sets
/// m~_j = min(|W_j|, kappa k~_j) with the smallest kappa for which
///   max_l sum_j (|W_j| / m~_j - 1) mu_local(j,l) k~_j <= 1,
/// and requires m_j >= C_test m~_j ln(1/eps) log2(n). Passes when every
/// candidate is satisfied.
ConditionIIReport check_condition_ii(const CoherenceProfile& profile, const std::vector<int>& budgets,
                                     double epsilon, std::size_t n, double c_test,
                                     TildeSearch search = TildeSearch::extreme);

/// Smallest kappa with max_l sum_j max(0, |W_j| - kappa k~_j) mu_local(j,l) / kappa <= 1.
double minimal_kappa(const LevelTable& mu_local, const RVec& tilde_k);

struct ConditionReport {
  ConditionIReport condition_i;
  ConditionIIReport condition_ii;
  bool pass = false;
};

ConditionReport check_conditions(const CoherenceProfile& profile, const std::vector<int>& budgets,
                                 double epsilon, std::size_t n, double c_test,
                                 TildeSearch search = TildeSearch::extreme);

}  // namespace fhcs
