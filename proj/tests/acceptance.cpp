// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <sys/wait.h>

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "fhcs/analysis.hpp"
#include "fhcs/bands.hpp"
#include "fhcs/experiment.hpp"
#include "fhcs/fourier_haar.hpp"
#include "fhcs/kernels.hpp"
#include "fhcs/levels.hpp"
#include "fhcs/solver.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace fhcs;

namespace {

// Tolerances and budgets.
constexpr double kEntryTol = 1e-10;
constexpr double kEntrySeconds = 30.0;
constexpr double kUnitaryTol = 1e-10;
constexpr double kConstantSpread = 2.0;
constexpr double kSvdTol = 1e-8;
constexpr double kRefineTol = 0.01;
constexpr double kChainSlack = 1e-12;
constexpr int kOracleInstances = 20;
constexpr double kOracleL2Tol = 1e-4;
constexpr double kOracleObjTol = 1e-4;
constexpr double kCertificateTol = 1e-5;
constexpr double kSuccessRate = 0.95;
constexpr double kRecoverySeconds = 300.0;
constexpr std::uint64_t kCalibrationSeed = 1000;
constexpr std::uint64_t kAcceptanceSeed = 1;
constexpr int kSigmaVectors = 100;
constexpr double kSigmaTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// U = F Phi with F from twiddles and Phi from the atom definitions, skipping
// the zeros of each atom.
std::vector<CVec> brute_force_u(std::size_t n) {
  const auto phi = oracle::haar_matrix(n);
  CVec twiddle(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t t = 0; t < n; ++t) twiddle[t] = std::polar(scale, 2.0 * std::acos(-1.0) * double(t) / double(n));
  const int lo = -static_cast<int>(n / 2) + 1;
  std::vector<CVec> u(n, CVec(n));  // u[i][slot]
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < n; ++t) {
      if (phi[t][i] == 0.0) continue;
      for (std::size_t s = 0; s < n; ++s) {
        const long long w = lo + static_cast<long long>(s);
        const auto idx = static_cast<std::size_t>(((w * static_cast<long long>(t)) % static_cast<long long>(n) +
                                                   static_cast<long long>(n)) % static_cast<long long>(n));
        u[i][s] += phi[t][i] * twiddle[idx];
      }
    }
  }
  return u;
}

Outcome criterion_entries() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t n : {8u, 64u, 256u, 1024u}) {
    const auto levels = LevelStructure::from_size(n);
    const auto u = build_U(levels, BuildMode::analytic);
    const auto ref = brute_force_u(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t s = 0; s < n; ++s) worst = std::max(worst, std::abs(u.dense()(s, i) - ref[i][s]));
  }
  const double secs = seconds_since(t0);
  return {worst <= kEntryTol && secs < kEntrySeconds,
          fmt("max |U_analytic - F Phi| = %.2e over n = 8, 64, 256, 1024 in %.1f s", worst, secs)};
}

Outcome criterion_unitarity() {
  double worst = 0.0;
  for (std::size_t n : {2u, 8u, 64u, 256u, 1024u}) {
    const auto u = build_U(LevelStructure::from_size(n), BuildMode::analytic);
    Eigen::MatrixXcd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t s = 0; s < n; ++s) m(Eigen::Index(s), Eigen::Index(i)) = u.dense()(s, i);
    const Eigen::MatrixXcd g = m.adjoint() * m - Eigen::MatrixXcd::Identity(Eigen::Index(n), Eigen::Index(n));
    worst = std::max(worst, g.cwiseAbs().maxCoeff());
  }
  return {worst <= kUnitaryTol, fmt("max |U*U - I| = %.2e for n = 2 .. 1024", worst)};
}

struct DecayFits {
  std::vector<double> coherence, block_norm;
};

const DecayFits& decay_fits() {
  static const DecayFits fits = [] {
    DecayFits f;
    for (int r = 6; r <= 10; ++r) {
      const auto u = build_U(LevelStructure(r), BuildMode::analytic);
      f.coherence.push_back(coherence_decay_constant(local_coherences(u).mu_local));
      f.block_norm.push_back(block_norm_decay_constant(block_norms(u)));
    }
    return f;
  }();
  return fits;
}

std::string list(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt("%.4f", x);
  return s;
}

double spread(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
}

Outcome criterion_coherence() {
  const auto& c = decay_fits().coherence;
  return {spread(c) < kConstantSpread, fmt("coherence constant for r = 6..10: %s (max/min %.3f)", list(c).c_str(), spread(c))};
}

double svd_norm(const DenseMatrix& b) {
  Eigen::MatrixXcd m(Eigen::Index(b.rows), Eigen::Index(b.cols));
  for (std::size_t i = 0; i < b.rows; ++i)
    for (std::size_t j = 0; j < b.cols; ++j) m(Eigen::Index(i), Eigen::Index(j)) = b(i, j);
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()(0);
}

Outcome criterion_block_norms() {
  const auto& c = decay_fits().block_norm;
  PowerIterationOptions power;
  power.method = SpectralMethod::power;
  power.tol = 1e-15;
  power.max_iter = 400000;
  double lanczos_err = 0.0, power_err = 0.0;
  for (int r = 1; r <= 6; ++r) {
    const auto u = build_U(LevelStructure(r), BuildMode::analytic);
    const auto lz = block_norms(u);
    const auto pw = block_norms(u, power);
    for (int j = 0; j < r; ++j) {
      for (int l = 0; l < r; ++l) {
        const double ref = svd_norm(u.block(j, l));
        lanczos_err = std::max(lanczos_err, std::abs(lz(j, l) - ref));
        power_err = std::max(power_err, std::abs(pw(j, l) - ref));
      }
    }
  }
  return {spread(c) < kConstantSpread && lanczos_err <= kSvdTol && power_err <= kSvdTol,
          fmt("block-norm constant for r = 6..10: %s (max/min %.3f); vs SVD at n <= 64: lanczos %.1e, power %.1e",
              list(c).c_str(), spread(c), lanczos_err, power_err)};
}

Outcome criterion_sparsity_chain() {
  bool ok = true;
  double worst_change = 0.0, worst_ratio_1 = 0.0, worst_ratio_2 = 0.0, worst_brute = 0.0;
  for (int r : {3, 4}) {
    const LevelStructure levels(r);
    const std::vector<int> kv(static_cast<std::size_t>(r), 1);
    const SparsityPattern k(levels, kv);
    const auto u = build_U(levels, BuildMode::analytic);
    const auto exact = relative_sparsity_exact(u, k);
    const auto bound = relative_sparsity_bound(block_norms(u), k);
    // The grid search is checked against an independent enumeration too.
    const auto brute = oracle::relative_sparsity_brute(levels.n(), kv, exact.phase_grid);
    for (int j = 0; j < r; ++j) {
      const auto J = static_cast<std::size_t>(j);
      const double top = std::max(exact.K[J], exact.K_refined[J]);
      ok = ok && top <= bound.block_norm_bound[J] * (1.0 + kChainSlack) &&
           bound.block_norm_bound[J] <= bound.decay_bound[J] * (1.0 + kChainSlack) &&
           exact.relative_change[J] < kRefineTol;
      worst_change = std::max(worst_change, exact.relative_change[J]);
      worst_ratio_1 = std::max(worst_ratio_1, top / bound.block_norm_bound[J]);
      worst_ratio_2 = std::max(worst_ratio_2, bound.block_norm_bound[J] / bound.decay_bound[J]);
      worst_brute = std::max(worst_brute, std::abs(exact.K[J] - brute[J]) / brute[J]);
    }
  }
  ok = ok && worst_brute <= 1e-10;
  return {ok, fmt("n = 8, 16: max K/bound %.3f, max bound/decay %.3f, grid doubling change %.2e, vs brute %.1e",
                  worst_ratio_1, worst_ratio_2, worst_change, worst_brute)};
}

Outcome criterion_solver_oracle() {
  const std::vector<int> kv = {1, 1, 2, 2, 2};
  const std::vector<int> budgets = {2, 2, 4, 6, 10};
  const LevelStructure levels(5);
  double worst_l2 = 0.0, worst_obj = 0.0, worst_cert = 0.0, worst_align = 0.0;
  for (int t = 0; t < kOracleInstances; ++t) {
    const std::uint64_t seed = 5000 + static_cast<std::uint64_t>(t);
    const double eta_rel = t % 2 == 0 ? 1e-3 : 1e-2;
    const CVec c = random_sparse_in_levels(levels, SparsityPattern(levels, kv), seed);
    auto op = std::make_shared<const MeasurementOperator>(draw_omega(5, budgets, seed + 1));
    const CVec clean = op->forward(c);
    const double eta = eta_rel * kernels::norm(clean);
    const RecoveryProblem problem(op, add_noise(clean, eta, seed + 2), eta);
    const auto res = solve_qcbp(problem);
    const auto ref = oracle::subgradient_qcbp(oracle::dense_A(32, op->plan().omega), problem.y, eta, 32);

    double diff = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) diff += std::norm(res.c_hat[i] - ref.c[i]);
    worst_l2 = std::max(worst_l2, std::sqrt(diff) / oracle::l2(ref.c));
    worst_obj = std::max(worst_obj, std::abs(res.objective - ref.objective) / ref.objective);
    const auto& cert = res.certificate;
    const double y_norm = oracle::l2(problem.y);
    worst_cert = std::max({worst_cert, cert.dual_violation, cert.feasibility_surplus / y_norm,
                           std::max(0.0, cert.relative_gap)});
    worst_align = std::max(worst_align, cert.sign_alignment);
  }
  return {worst_l2 <= kOracleL2Tol && worst_obj <= kOracleObjTol && worst_cert <= kCertificateTol,
          fmt("%d instances at n = 32: rel l2 %.1e, rel objective %.1e, certificate violation %.1e (sign alignment %.1e)",
              kOracleInstances, worst_l2, worst_obj, worst_cert, worst_align)};
}

struct RecoveryRuns {
  double threshold = -1.0;
  TrialSummary multilevel, uniform, noiseless;
  double seconds = 0.0;
};

const RecoveryRuns& recovery_runs() {
  static const RecoveryRuns runs = [] {
    RecoveryRuns out;
    ExperimentConfig c;  // n = 256, k = (2,2,3,4,4,3,2,1), eta = 1e-6 ||y||, 50 trials
    c.seed = kCalibrationSeed;
    // Calibration: the smallest grid value from which every larger one reaches the target.
    std::vector<double> grid;
    for (int i = 5; i <= 15; ++i) grid.push_back(0.01 * i);
    for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
      if (summarize(run_trials(c, SamplingMode::multilevel, *it, 0)).success_rate < kSuccessRate) break;
      out.threshold = *it;
    }
    c.seed = kAcceptanceSeed;
    const auto t0 = std::chrono::steady_clock::now();
    out.multilevel = summarize(run_trials(c, SamplingMode::multilevel, kCalibratedCAlloc, 0));
    out.seconds = seconds_since(t0);
    out.uniform = summarize(run_trials(c, SamplingMode::uniform_global, kCalibratedCAlloc, 0));
    c.eta_rel = 0.0;
    out.noiseless = summarize(run_trials(c, SamplingMode::multilevel, kCalibratedCAlloc, 0));
    return out;
  }();
  return runs;
}

Outcome criterion_recovery() {
  const auto& r = recovery_runs();
  const bool ok = r.threshold > 0.0 && kCalibratedCAlloc >= r.threshold && r.multilevel.success_rate >= kSuccessRate &&
                  r.noiseless.success_rate >= kSuccessRate && r.seconds < kRecoverySeconds;
  return {ok, fmt("calibrated threshold %.2f, pinned C_alloc %.2f (m = %zu): success %.2f in %.1f s, "
                  "noiseless success %.2f",
                  r.threshold, kCalibratedCAlloc, r.multilevel.m_total, r.multilevel.success_rate, r.seconds,
                  r.noiseless.success_rate)};
}

Outcome criterion_structure() {
  const auto& r = recovery_runs();
  return {r.multilevel.m_total == r.uniform.m_total && r.multilevel.median_error < r.uniform.median_error,
          fmt("median relative error at m = %zu: multilevel %.3e, uniform-global %.3e", r.multilevel.m_total,
              r.multilevel.median_error, r.uniform.median_error)};
}

Outcome criterion_sigma() {
  const LevelStructure levels(3);
  double worst = 0.0;
  for (int t = 0; t < kSigmaVectors; ++t) {
    const auto seed = static_cast<std::uint64_t>(700 + t);
    const CVec c = oracle::random_vector(8, seed);
    // Cycle through patterns, including empty and full levels.
    const std::vector<int> kv = {t % 2, (t / 2) % 3, (t / 6) % 5};
    const double got = sigma_km(c, levels, SparsityPattern(levels, kv));
    const double want = oracle::sigma_exhaustive(c, kv);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, want));
  }
  return {worst <= kSigmaTol, fmt("%d vectors at n = 8: max relative difference %.1e", kSigmaVectors, worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_reproducibility() {
  const fs::path dir = fs::temp_directory_path() / ("fhcs_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({"trials": 12, "seed": 3})";
  bool ran = true;
  auto run = [&](const char* name, int threads) {
    const std::string cmd = std::string("\"") + FHCS_CLI_PATH + "\" recover --config \"" +
                            (dir / "config.json").string() + "\" --threads " + std::to_string(threads) + " --out \"" +
                            (dir / name).string() + "\" > /dev/null";
    const int status = std::system(cmd.c_str());
    ran = ran && WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  run("serial_a", 1);
  run("serial_b", 1);
  run("parallel", 4);
  bool same = ran;
  for (const char* f : {"config.json", "trials.csv", "summary.json"}) {
    const std::string a = slurp(dir / "serial_a" / f);
    same = same && !a.empty() && a == slurp(dir / "serial_b" / f) && a == slurp(dir / "parallel" / f);
  }
  fs::remove_all(dir);
  return {same, std::string("recover outputs ") + (same ? "byte-identical" : "differ") +
                    " across two serial runs and a 4-thread run"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"closed-form U", criterion_entries},
      {"unitarity", criterion_unitarity},
      {"coherence decay", criterion_coherence},
      {"block-norm decay", criterion_block_norms},
      {"relative sparsity chain", criterion_sparsity_chain},
      {"solver vs oracle", criterion_solver_oracle},
      {"recovery at calibrated C_alloc", criterion_recovery},
      {"structure advantage", criterion_structure},
      {"sigma vs enumeration", criterion_sigma},
      {"reproducibility", criterion_reproducibility},
  };
  std::printf("isa: %s\n", std::string(kernels::isa_name(kernels::active_isa())).c_str());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
