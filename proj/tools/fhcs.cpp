// fhcs: audit, recovery trials and sweeps for multilevel Fourier-Haar sampling.
//
// Exit codes: 0 success, 1 configuration or input error, 2 capacity error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "fhcs/bands.hpp"
#include "fhcs/experiment.hpp"
#include "fhcs/fft.hpp"
#include "fhcs/haar.hpp"
#include "fhcs/kernels.hpp"
#include "fhcs/numfmt.hpp"
#include "fhcs/serialize.hpp"

namespace fs = std::filesystem;
using namespace fhcs;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCapacity = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file (every field has a default)");
  cmd->add_option("--seed", f.seed, "Base seed, overrides the config");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--threads", f.threads, "Worker threads for trials (0 = all cores)");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.out = f.out;
  if (f.threads) c.threads = *f.threads;
  return c;
}

fs::path output_dir(const ExperimentConfig& c, const char* fallback) {
  fs::path dir = c.out.empty() ? fs::path(fallback) : fs::path(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ParameterError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_file(path, os.str());
}

Json metadata(const char* command, const ExperimentConfig& c, double seconds) {
  return Json{{"command", command},
              {"threads", c.threads},
              {"isa", std::string(kernels::isa_name(kernels::active_isa()))},
              {"wall_seconds", seconds}};
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_audit(const CommonFlags& flags, bool write_u) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = resolve(flags);
  const AuditResult a = run_audit(c);
  const fs::path dir = output_dir(c, "audit_out");
  write_json(dir / "config.json", to_json(c));
  write_json(dir / "profile.json", to_json(a.profile));
  write_json(dir / "conditions.json", to_json(a.conditions));
  write_json(dir / "audit.json", audit_summary_json(a, c));
  write_with(dir / "mu_block.csv", [&](std::ostream& os) { write_csv(os, a.profile.mu_block); });
  write_with(dir / "mu_local.csv", [&](std::ostream& os) { write_csv(os, a.profile.mu_local); });
  write_with(dir / "block_norm.csv", [&](std::ostream& os) { write_csv(os, a.profile.block_norm); });
  if (write_u) write_with(dir / "u.csv", [&](std::ostream& os) { write_csv(os, a.u); });
  write_json(dir / "metadata.json", metadata("audit", c, since(t0)));

  std::printf("n=%zu  coherence constant %.6g  block-norm constant %.6g\n", c.n, a.profile.coherence_constant,
              a.profile.block_norm_constant);
  std::printf("condition (i) %s  condition (ii) %s (margin %s)\n", a.conditions.condition_i.pass ? "pass" : "fail",
              a.conditions.condition_ii.pass ? "pass" : "fail",
              format_double(a.conditions.condition_ii.margin).c_str());
  std::printf("wrote %s\n", dir.string().c_str());
  return kExitOk;
}

int cmd_recover(const CommonFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = resolve(flags);
  const auto records = run_trials(c, c.sampling, c.c_alloc, c.threads);
  const TrialSummary s = summarize(records);
  const fs::path dir = output_dir(c, "recover_out");
  write_json(dir / "config.json", to_json(c));
  write_with(dir / "trials.csv", [&](std::ostream& os) { write_trials_csv(os, records); });
  Json summary = to_json(s);
  summary["sampling"] = sampling_name(c.sampling);
  summary["c_alloc"] = c.c_alloc;
  summary["success_threshold"] = c.success_threshold;
  write_json(dir / "summary.json", summary);

  Json meta = metadata("recover", c, since(t0));
  Json times = Json::array();
  for (const auto& r : records) times.push_back(r.wall_seconds);
  meta["trial_wall_seconds"] = std::move(times);
  write_json(dir / "metadata.json", meta);

  std::printf("%d trials, success rate %s, median relative error %s\n", s.trials,
              format_double(s.success_rate).c_str(), format_double(s.median_error).c_str());
  if (s.failed) std::printf("%d trials failed; see trials.csv\n", s.failed);
  return kExitOk;
}

int cmd_sweep(const CommonFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  const ExperimentConfig c = resolve(flags);
  const auto rows = run_sweep(c, c.threads);
  const fs::path dir = output_dir(c, "sweep_out");
  write_json(dir / "config.json", to_json(c));
  write_with(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, rows); });
  write_json(dir / "metadata.json", metadata("sweep", c, since(t0)));
  for (const auto& row : rows) {
    std::printf("c_alloc %-6s m %-4zu success %s\n", format_double(row.c_alloc).c_str(), row.summary.m_total,
                format_double(row.summary.success_rate).c_str());
  }
  return kExitOk;
}

int cmd_bands(const CommonFlags& flags) {
  const ExperimentConfig c = resolve(flags);
  const auto levels = LevelStructure::from_size(c.n);
  const SparsityPattern k(levels, c.k);
  const auto budgets = allocate_budgets(k, {c.c_alloc, c.epsilon}, c.n);
  std::size_t total = 0;
  for (int m : budgets) total += static_cast<std::size_t>(m);
  const BandPlan plan = c.sampling == SamplingMode::multilevel ? draw_omega(levels.r(), budgets, c.seed)
                                                               : draw_uniform_global(levels.r(), total, c.seed);
  Json j = to_json(plan);
  j["bands"] = build_bands(levels.r());
  j["sampling"] = sampling_name(c.sampling);
  if (c.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    const fs::path dir = output_dir(c, "");
    write_json(dir / "band_plan.json", j);
    std::printf("wrote %s\n", (dir / "band_plan.json").string().c_str());
  }
  return kExitOk;
}

CVec read_vector_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open input " + path);
  CVec v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (lineno == 1) continue;  // header
      throw ParameterError(path + ":" + std::to_string(lineno) + ": not a number");
    }
    if (fields.size() == 1) {
      v.emplace_back(fields[0], 0.0);
    } else if (fields.size() == 2) {
      v.emplace_back(fields[0], fields[1]);
    } else if (fields.size() == 3) {
      v.emplace_back(fields[1], fields[2]);  // index,real,imag
    } else {
      throw ParameterError(path + ":" + std::to_string(lineno) + ": expected 1 to 3 columns");
    }
  }
  if (!is_power_of_two(v.size()) || v.size() < 2) {
    throw ParameterError("input length " + std::to_string(v.size()) + " is not a power of two >= 2");
  }
  return v;
}

int cmd_transform(const std::string& op, const std::string& input, const std::string& out) {
  const CVec x = read_vector_csv(input);
  CVec y;
  if (op == "haar") {
    y = haar_forward(x);
  } else if (op == "ihaar") {
    y = haar_inverse(x);
  } else if (op == "dft") {
    y = dft_forward(x);
  } else if (op == "idft") {
    y = dft_inverse(x);
  } else {
    throw ParameterError("unknown transform " + op);
  }
  std::ostringstream os;
  if (op == "dft") {
    // Rows in ascending omega = -n/2+1, ..., n/2.
    os << "omega,real,imag\n";
    for (std::size_t s = 0; s < y.size(); ++s) {
      os << frequency_of_slot(s, y.size()) << ',' << format_double(y[s].real()) << ','
         << format_double(y[s].imag()) << '\n';
    }
  } else {
    write_csv(os, y);
  }
  if (out.empty()) {
    std::cout << os.str();
  } else {
    write_file(out, os.str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilevel Fourier-Haar compressed sensing: audit, recovery and sweeps"};
  app.require_subcommand(1);

  CommonFlags audit_flags, recover_flags, sweep_flags, bands_flags;
  bool write_u = false;
  auto* audit = app.add_subcommand("audit", "Coherence profile and recovery-condition report");
  add_common(audit, audit_flags);
  audit->add_flag("--u-csv", write_u, "Also write the dense U as u.csv (omega,column,real,imag)");

  auto* recover = app.add_subcommand("recover", "Seeded recovery trials");
  add_common(recover, recover_flags);

  auto* sweep = app.add_subcommand("sweep", "Success rate over the c_alloc_sweep list");
  add_common(sweep, sweep_flags);

  auto* bands = app.add_subcommand("bands", "Frequency bands and one drawn sampling set");
  add_common(bands, bands_flags);

  std::string op, input, out;
  auto* transform = app.add_subcommand("transform", "One-shot Haar or DFT of a CSV vector");
  transform->add_option("op", op, "haar | ihaar | dft | idft")
      ->required()
      ->check(CLI::IsMember({"haar", "ihaar", "dft", "idft"}));
  transform->add_option("input", input, "CSV with real | real,imag | index,real,imag rows")->required();
  transform->add_option("--out", out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*audit) return cmd_audit(audit_flags, write_u);
    if (*recover) return cmd_recover(recover_flags);
    if (*sweep) return cmd_sweep(sweep_flags);
    if (*bands) return cmd_bands(bands_flags);
    if (*transform) return cmd_transform(op, input, out);
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "capacity error: %s\n", e.what());
    return kExitCapacity;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
