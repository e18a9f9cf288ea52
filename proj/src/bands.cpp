#include "fhcs/bands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "fhcs/rng.hpp"

namespace fhcs {

std::vector<std::vector<int>> build_bands(int r) {
  if (r < 1 || r > 30) throw ParameterError("number of bands must be in [1, 30]");
  std::vector<std::vector<int>> bands(static_cast<std::size_t>(r));
  bands[0] = {0, 1};
  for (int j = 1; j < r; ++j) {
    auto& w = bands[static_cast<std::size_t>(j)];
    w.reserve(band_size(j));
    for (int omega = -(1 << j) + 1; omega <= -(1 << (j - 1)); ++omega) w.push_back(omega);
    for (int omega = (1 << (j - 1)) + 1; omega <= (1 << j); ++omega) w.push_back(omega);
  }
  return bands;
}

std::size_t band_size(int j) { return j == 0 ? 2 : std::size_t{1} << j; }

int band_of_frequency(int omega) {
  if (omega == 0 || omega == 1) return 0;
  if (omega > 1) {
    int j = 0;
    while ((1 << j) < omega) ++j;
    return j;
  }
  int j = 0;
  while ((1 << (j + 1)) <= -omega) ++j;
  return j + 1;
}

namespace {

void check_params(const AllocationParams& params) {
  if (!(params.epsilon > 0.0) || params.epsilon > std::exp(-1.0) * (1.0 + 1e-15)) {
    throw ParameterError("epsilon must lie in (0, 1/e], got " + std::to_string(params.epsilon));
  }
  if (!(params.c_alloc >= 0.0) || !std::isfinite(params.c_alloc)) {
    throw ParameterError("c_alloc must be a finite nonnegative number");
  }
}

}  // namespace

std::vector<double> allocation_theory(const SparsityPattern& k, const AllocationParams& params,
                                      std::size_t n) {
  check_params(params);
  const int r = k.levels();
  if (n != (std::size_t{1} << r)) throw SizeError("sparsity pattern does not match n");
  const double log_eps = -std::log(params.epsilon);
  const double log_n = static_cast<double>(ilog2(n));
  std::vector<double> theory(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) {
    double weighted = 0.0;
    for (int l = 0; l < r; ++l) weighted += std::pow(2.0, -0.5 * std::abs(j - l)) * k[l];
    theory[static_cast<std::size_t>(j)] = params.c_alloc * weighted * log_eps * log_n;
  }
  return theory;
}

std::vector<int> allocate_budgets(const SparsityPattern& k, const AllocationParams& params,
                                  std::size_t n) {
  const auto theory = allocation_theory(k, params, n);
  // Every weight 2^{-|j-l|/2} and both log factors are positive, so the
  // unscaled expression is positive in every band as soon as k != 0.
  const double min_budget = k.total() > 0 ? 1.0 : 0.0;
  std::vector<int> m(theory.size());
  for (std::size_t j = 0; j < theory.size(); ++j) {
    const double cap = static_cast<double>(band_size(static_cast<int>(j)));
    // Relative guard keeps values like 4 * (1 - 1e-16) from rounding up to 5.
    const double lifted = std::max(min_budget, std::ceil(theory[j] * (1.0 - 1e-12)));
    m[j] = static_cast<int>(std::min(cap, lifted));
  }
  return m;
}

BandPlan draw_omega(int r, const std::vector<int>& budgets, std::uint64_t seed) {
  if (static_cast<int>(budgets.size()) != r) throw ParameterError("budget vector length must equal r");
  const auto bands = build_bands(r);
  BandPlan plan{r, budgets, {}, seed};
  for (int j = 0; j < r; ++j) {
    const int mj = budgets[static_cast<std::size_t>(j)];
    const auto& w = bands[static_cast<std::size_t>(j)];
    if (mj < 0 || static_cast<std::size_t>(mj) > w.size()) {
      throw ParameterError("budget m_" + std::to_string(j) + " = " + std::to_string(mj) +
                           " outside [0, " + std::to_string(w.size()) + "]");
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    for (std::size_t idx : sample_without_replacement(rng, w.size(), static_cast<std::size_t>(mj))) {
      plan.omega.push_back(w[idx]);
    }
  }
  std::sort(plan.omega.begin(), plan.omega.end());
  return plan;
}

BandPlan full_plan(int r) {
  std::vector<int> budgets(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) budgets[static_cast<std::size_t>(j)] = static_cast<int>(band_size(j));
  return draw_omega(r, budgets, 0);
}

BandPlan draw_uniform_global(int r, std::size_t m, std::uint64_t seed) {
  const std::size_t n = std::size_t{1} << r;
  if (m > n) throw ParameterError("global sample size exceeds n");
  Rng rng(derive_seed(seed, 0xC0FFEEULL));
  BandPlan plan{r, std::vector<int>(static_cast<std::size_t>(r), 0), {}, seed};
  const int half = static_cast<int>(n / 2);
  for (std::size_t idx : sample_without_replacement(rng, n, m)) {
    const int omega = static_cast<int>(idx) - half + 1;
    plan.omega.push_back(omega);
    ++plan.budgets[static_cast<std::size_t>(band_of_frequency(omega))];
  }
  std::sort(plan.omega.begin(), plan.omega.end());
  return plan;
}

void validate(const BandPlan& plan) {
  if (plan.r < 1 || static_cast<int>(plan.budgets.size()) != plan.r) {
    throw ParameterError("band plan: budgets do not match r");
  }
  const int half = static_cast<int>(plan.n() / 2);
  std::vector<int> counts(static_cast<std::size_t>(plan.r), 0);
  for (std::size_t i = 0; i < plan.omega.size(); ++i) {
    const int omega = plan.omega[i];
    if (omega <= -half || omega > half) throw ParameterError("band plan: frequency out of range");
    if (i > 0 && plan.omega[i - 1] >= omega) {
      throw ParameterError("band plan: frequencies must be strictly ascending");
    }
    ++counts[static_cast<std::size_t>(band_of_frequency(omega))];
  }
  for (int j = 0; j < plan.r; ++j) {
    const int mj = plan.budgets[static_cast<std::size_t>(j)];
    if (mj != counts[static_cast<std::size_t>(j)] || static_cast<std::size_t>(mj) > band_size(j)) {
      throw ParameterError("band plan: budget m_" + std::to_string(j) + " inconsistent with Omega");
    }
  }
}

}  // namespace fhcs
