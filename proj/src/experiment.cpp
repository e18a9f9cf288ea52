#include "fhcs/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

#include "fhcs/bands.hpp"
#include "fhcs/haar.hpp"
#include "fhcs/kernels.hpp"
#include "fhcs/numfmt.hpp"
#include "fhcs/rng.hpp"

namespace fhcs {

std::string sampling_name(SamplingMode mode) {
  return mode == SamplingMode::multilevel ? "multilevel" : "uniform-global";
}

namespace {

constexpr std::uint64_t kSignalStream = 1;
constexpr std::uint64_t kOmegaStream = 2;
constexpr std::uint64_t kNoiseStream = 3;

SamplingMode parse_sampling(const std::string& s) {
  if (s == "multilevel") return SamplingMode::multilevel;
  if (s == "uniform-global") return SamplingMode::uniform_global;
  throw ParameterError("sampling must be \"multilevel\" or \"uniform-global\", got \"" + s + "\"");
}

MagnitudeLaw parse_magnitude(const std::string& s) {
  if (s == "unit_modulus") return MagnitudeLaw::unit_modulus;
  if (s == "gaussian") return MagnitudeLaw::gaussian;
  throw ParameterError("magnitude must be \"unit_modulus\" or \"gaussian\", got \"" + s + "\"");
}

TildeSearch parse_search(const std::string& s) {
  if (s == "extreme") return TildeSearch::extreme;
  if (s == "grid") return TildeSearch::grid;
  throw ParameterError("tilde_search must be \"extreme\" or \"grid\", got \"" + s + "\"");
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParameterError(std::string("config field \"") + key + "\" has the wrong type");
  }
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ParameterError("unknown " + where + " field \"" + item.key() + "\"");
  }
}

void validate(const ExperimentConfig& c) {
  if (!is_power_of_two(c.n) || c.n < 2) throw ParameterError("n must be a power of two >= 2");
  const auto levels = LevelStructure::from_size(c.n);
  if (static_cast<int>(c.k.size()) != levels.r()) {
    throw ParameterError("k needs " + std::to_string(levels.r()) + " entries for n = " + std::to_string(c.n));
  }
  SparsityPattern(levels, c.k);
  allocate_budgets(SparsityPattern(levels, c.k), {c.c_alloc, c.epsilon}, c.n);
  for (double v : c.c_alloc_sweep) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("c_alloc_sweep entries must be finite and >= 0");
  }
  if (c.trials < 1) throw ParameterError("trials must be >= 1");
  if (!(c.eta_rel >= 0.0) || !std::isfinite(c.eta_rel)) throw ParameterError("eta_rel must be finite and >= 0");
  if (!(c.success_threshold > 0.0)) throw ParameterError("success_threshold must be positive");
  if (!(c.c_test > 0.0)) throw ParameterError("c_test must be positive");
  if (c.phase_grid < 1) throw ParameterError("phase_grid must be >= 1");
  const auto& s = c.solver;
  if (s.max_iter < 1 || s.window < 1) throw ParameterError("solver.max_iter and solver.window must be >= 1");
  if (!(s.tau > 0.0) || !(s.sigma > 0.0) || s.tau * s.sigma >= 1.0) {
    throw ParameterError("solver steps need tau, sigma > 0 and tau * sigma < 1");
  }
  if (!(s.tol_dual >= 0.0)) throw ParameterError("solver.tol_dual must be >= 0");
}

}  // namespace

ExperimentConfig config_from_json(const Json& j) {
  reject_unknown(j,
                 {"n", "k", "epsilon", "c_alloc", "c_alloc_sweep", "trials", "seed", "eta_rel", "sampling",
                  "success_threshold", "magnitude", "c_test", "tilde_search", "phase_grid", "solver", "out", "threads"},
                 "config");
  ExperimentConfig c;
  read(j, "n", c.n);
  read(j, "k", c.k);
  read(j, "epsilon", c.epsilon);
  read(j, "c_alloc", c.c_alloc);
  read(j, "c_alloc_sweep", c.c_alloc_sweep);
  read(j, "trials", c.trials);
  read(j, "seed", c.seed);
  read(j, "eta_rel", c.eta_rel);
  read(j, "success_threshold", c.success_threshold);
  read(j, "c_test", c.c_test);
  read(j, "phase_grid", c.phase_grid);
  read(j, "out", c.out);
  read(j, "threads", c.threads);
  std::string text;
  if (j.contains("sampling")) {
    read(j, "sampling", text);
    c.sampling = parse_sampling(text);
  }
  if (j.contains("magnitude")) {
    read(j, "magnitude", text);
    c.magnitude = parse_magnitude(text);
  }
  if (j.contains("tilde_search")) {
    read(j, "tilde_search", text);
    c.tilde_search = parse_search(text);
  }
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    reject_unknown(s, {"max_iter", "tol_feas_rel", "tol_feas_abs", "tol_gap", "window", "tau", "sigma", "polish", "tol_dual"},
                  "solver");
    read(s, "max_iter", c.solver.max_iter);
    read(s, "tol_feas_rel", c.solver.tol_feas_rel);
    read(s, "tol_feas_abs", c.solver.tol_feas_abs);
    read(s, "tol_gap", c.solver.tol_gap);
    read(s, "window", c.solver.window);
    read(s, "tau", c.solver.tau);
    read(s, "sigma", c.solver.sigma);
    read(s, "polish", c.solver.polish);
    read(s, "tol_dual", c.solver.tol_dual);
  }
  validate(c);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  return Json{{"n", c.n},
              {"k", c.k},
              {"epsilon", c.epsilon},
              {"c_alloc", c.c_alloc},
              {"c_alloc_sweep", c.c_alloc_sweep},
              {"trials", c.trials},
              {"seed", c.seed},
              {"eta_rel", c.eta_rel},
              {"sampling", sampling_name(c.sampling)},
              {"success_threshold", c.success_threshold},
              {"magnitude", c.magnitude == MagnitudeLaw::unit_modulus ? "unit_modulus" : "gaussian"},
              {"c_test", c.c_test},
              {"tilde_search", c.tilde_search == TildeSearch::extreme ? "extreme" : "grid"},
              {"phase_grid", c.phase_grid},
              {"solver",
               {{"max_iter", c.solver.max_iter},
                {"tol_feas_rel", c.solver.tol_feas_rel},
                {"tol_feas_abs", c.solver.tol_feas_abs},
                {"tol_gap", c.solver.tol_gap},
                {"window", c.solver.window},
                {"tau", c.solver.tau},
                {"sigma", c.solver.sigma},
                {"polish", c.solver.polish},
                {"tol_dual", c.solver.tol_dual}}}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

TrialRecord run_trial(const ExperimentConfig& config, SamplingMode mode, double c_alloc, int trial) {
  const auto start = std::chrono::steady_clock::now();
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));
  try {
    const auto levels = LevelStructure::from_size(config.n);
    const SparsityPattern k(levels, config.k);
    const CVec c = random_sparse_in_levels(levels, k, derive_seed(rec.seed, kSignalStream), config.magnitude);
    rec.sigma = sigma_km(c, levels, k);

    const auto budgets = allocate_budgets(k, {c_alloc, config.epsilon}, config.n);
    const std::uint64_t omega_seed = derive_seed(rec.seed, kOmegaStream);
    std::size_t total = 0;
    for (int m : budgets) total += static_cast<std::size_t>(m);
    BandPlan plan = mode == SamplingMode::multilevel ? draw_omega(levels.r(), budgets, omega_seed)
                                                     : draw_uniform_global(levels.r(), total, omega_seed);
    rec.budgets = plan.budgets;
    rec.m = plan.m();

    auto op = std::make_shared<const MeasurementOperator>(std::move(plan));
    const CVec clean = op->forward(c);
    rec.eta = config.eta_rel * kernels::norm(clean);
    RecoveryProblem problem(op, add_noise(clean, rec.eta, derive_seed(rec.seed, kNoiseStream)), rec.eta);
    const RecoveryResult res = solve_qcbp(problem, config.solver);

    // Phi is orthonormal, so ||x - x_hat|| = ||c - c_hat||.
    CVec diff(c.size());
    kernels::axpby(1.0, c, -1.0, res.c_hat, diff);
    const double ref = kernels::norm(c);
    rec.rel_error = ref > 0.0 ? kernels::norm(diff) / ref : kernels::norm(diff);
    rec.iterations = res.iterations;
    rec.converged = res.converged;
    rec.success = rec.rel_error <= config.success_threshold;
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.rel_error = std::numeric_limits<double>::quiet_NaN();
    rec.success = false;
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config, SamplingMode mode, double c_alloc,
                                    unsigned threads) {
  const auto count = static_cast<std::size_t>(config.trials);
  std::vector<TrialRecord> records(count);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < count; t = next++) {
      records[t] = run_trial(config, mode, c_alloc, static_cast<int>(t));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  return records;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

TrialSummary summarize(const std::vector<TrialRecord>& records) {
  TrialSummary s;
  s.trials = static_cast<int>(records.size());
  std::vector<double> errors;
  double iterations = 0.0;
  for (const auto& r : records) {
    if (!r.error.empty()) {
      ++s.failed;
      continue;
    }
    errors.push_back(r.rel_error);
    s.successes += r.success ? 1 : 0;
    s.converged += r.converged ? 1 : 0;
    iterations += r.iterations;
    s.m_total = r.m;
  }
  s.success_rate = s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
  s.median_error = quantile(errors, 0.5);
  s.q10 = quantile(errors, 0.1);
  s.q25 = quantile(errors, 0.25);
  s.q75 = quantile(errors, 0.75);
  s.q90 = quantile(errors, 0.9);
  s.max_error = errors.empty() ? std::numeric_limits<double>::quiet_NaN()
                               : *std::max_element(errors.begin(), errors.end());
  s.mean_iterations = errors.empty() ? 0.0 : iterations / static_cast<double>(errors.size());
  return s;
}

Json to_json(const TrialSummary& s) {
  auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  return Json{{"trials", s.trials},
              {"successes", s.successes},
              {"success_rate", num(s.success_rate)},
              {"converged", s.converged},
              {"failed", s.failed},
              {"m_total", s.m_total},
              {"median_error", num(s.median_error)},
              {"q10", num(s.q10)},
              {"q25", num(s.q25)},
              {"q75", num(s.q75)},
              {"q90", num(s.q90)},
              {"max_error", num(s.max_error)},
              {"mean_iterations", num(s.mean_iterations)}};
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
  os << "trial,seed,m,budgets,eta,rel_error,sigma,iterations,converged,success,error\n";
  for (const auto& r : records) {
    std::string budgets;
    for (std::size_t j = 0; j < r.budgets.size(); ++j) {
      if (j) budgets += ' ';
      budgets += std::to_string(r.budgets[j]);
    }
    std::string error = r.error;
    std::replace(error.begin(), error.end(), '"', '\'');
    os << r.trial << ',' << r.seed << ',' << r.m << ',' << budgets << ',' << format_double(r.eta) << ','
       << format_double(r.rel_error) << ',' << format_double(r.sigma) << ',' << r.iterations << ','
       << (r.converged ? 1 : 0) << ',' << (r.success ? 1 : 0) << ",\"" << error << "\"\n";
  }
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config, unsigned threads) {
  std::vector<SweepRow> rows;
  for (double c_alloc : config.c_alloc_sweep) {
    rows.push_back({c_alloc, summarize(run_trials(config, config.sampling, c_alloc, threads))});
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "c_alloc,m_total,trials,success_rate,median_error,q25,q75\n";
  for (const auto& row : rows) {
    const auto& s = row.summary;
    os << format_double(row.c_alloc) << ',' << s.m_total << ',' << s.trials << ',' << format_double(s.success_rate)
       << ',' << format_double(s.median_error) << ',' << format_double(s.q25) << ',' << format_double(s.q75)
       << '\n';
  }
}

ErrorBoundTerms error_bound_terms(std::size_t n, const std::vector<int>& k, const std::vector<int>& budgets,
                                  double epsilon) {
  ErrorBoundTerms t;
  t.budgets = budgets;
  t.E = 0.0;
  for (std::size_t j = 0; j < budgets.size(); ++j) {
    const double width = static_cast<double>(band_size(static_cast<int>(j)));
    t.band_widths.push_back(width);
    const double ratio = budgets[j] > 0 ? width / budgets[j] : std::numeric_limits<double>::infinity();
    t.E = std::max(t.E, ratio);
  }
  double total = 0.0;
  for (int kj : k) total += kj;
  t.D = 1.0 + std::sqrt(std::log2(6.0 / epsilon)) / std::log2(4.0 * t.E * static_cast<double>(n) * std::sqrt(total));
  return t;
}

Json to_json(const ErrorBoundTerms& t) {
  auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  Json widths = Json::array();
  for (double w : t.band_widths) widths.push_back(w);
  return Json{{"interpretation", "N_j - N_{j-1} = |W_j|"},
              {"band_widths", std::move(widths)},
              {"m", t.budgets},
              {"E", num(t.E)},
              {"D", num(t.D)}};
}

}  // namespace fhcs

namespace fhcs {

AuditResult run_audit(const ExperimentConfig& config) {
  const auto levels = LevelStructure::from_size(config.n);
  const SparsityPattern k(levels, config.k);
  ComputeProfileOptions opts;
  opts.sparsity.phase_grid = config.phase_grid;
  AuditResult a{build_U(levels, BuildMode::analytic), {}, {}, {}, {}, {}, {}};
  a.profile = compute_profile(a.u, k, opts);
  if (a.profile.K_exact) a.exact = relative_sparsity_exact(a.u, k, opts.sparsity);
  a.bound = relative_sparsity_bound(a.profile.block_norm, k);
  a.budgets = allocate_budgets(k, {config.c_alloc, config.epsilon}, config.n);
  a.conditions = check_conditions(a.profile, a.budgets, config.epsilon, config.n, config.c_test, config.tilde_search);
  a.terms = error_bound_terms(config.n, config.k, a.budgets, config.epsilon);
  return a;
}

Json audit_summary_json(const AuditResult& a, const ExperimentConfig& config) {
  auto vec = [](const RVec& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(std::isfinite(x) ? Json(x) : Json(nullptr));
    return out;
  };
  Json sparsity{{"K", vec(a.profile.K)},
                {"K_exact", a.profile.K_exact},
                {"block_norm_bound", vec(a.bound.block_norm_bound)},
                {"decay_expression", vec(a.bound.decay_expression)},
                {"decay_bound", vec(a.bound.decay_bound)},
                {"decay_constant", a.bound.decay_constant}};
  if (a.profile.K_exact) {
    sparsity["phase_grid"] = a.exact.phase_grid;
    sparsity["K_refined"] = vec(a.exact.K_refined);
    sparsity["relative_change"] = vec(a.exact.relative_change);
    sparsity["evaluations"] = a.exact.evaluations;
  }
  return Json{{"n", config.n},
              {"k", config.k},
              {"epsilon", config.epsilon},
              {"c_alloc", config.c_alloc},
              {"c_test", config.c_test},
              {"m", a.budgets},
              {"coherence_constant", a.profile.coherence_constant},
              {"block_norm_constant", a.profile.block_norm_constant},
              {"relative_sparsity", std::move(sparsity)},
              {"error_bound_terms", to_json(a.terms)},
              {"pass", a.conditions.pass}};
}

}  // namespace fhcs
