#include "fhcs/serialize.hpp"

#include <cmath>
#include <ostream>

#include "fhcs/numfmt.hpp"

namespace fhcs {

namespace {

Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json vec(const RVec& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

const char* search_name(TildeSearch s) { return s == TildeSearch::grid ? "grid" : "extreme"; }

}  // namespace

Json to_json(const BandPlan& plan) {
  return Json{{"r", plan.r}, {"m", plan.budgets}, {"omega", plan.omega}, {"seed", plan.seed}};
}

BandPlan band_plan_from_json(const Json& j) {
  BandPlan plan;
  try {
    plan.r = j.at("r").get<int>();
    plan.budgets = j.at("m").get<std::vector<int>>();
    plan.omega = j.at("omega").get<std::vector<int>>();
    plan.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("band plan: ") + e.what());
  }
  validate(plan);
  return plan;
}

Json to_json(const LevelTable& table) {
  Json rows = Json::array();
  for (int j = 0; j < table.r; ++j) {
    Json row = Json::array();
    for (int l = 0; l < table.r; ++l) row.push_back(num(table(j, l)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const CoherenceProfile& p) {
  return Json{{"n", p.n},
              {"k", p.k},
              {"mu_block", to_json(p.mu_block)},
              {"mu_local", to_json(p.mu_local)},
              {"block_norm", to_json(p.block_norm)},
              {"K", vec(p.K)},
              {"K_exact", p.K_exact},
              {"coherence_constant", num(p.coherence_constant)},
              {"block_norm_constant", num(p.block_norm_constant)}};
}

Json to_json(const ConditionIReport& report) {
  Json bands = Json::array();
  for (const auto& b : report.bands) {
    bands.push_back(Json{{"band", b.band},
                         {"budget", b.budget},
                         {"required", num(b.required)},
                         {"pass", b.pass},
                         {"margin", num(b.margin)}});
  }
  return Json{{"pass", report.pass}, {"bands", std::move(bands)}};
}

Json to_json(const ConditionIIReport& r) {
  return Json{{"pass", r.pass},
              {"vacuous", r.vacuous},
              {"margin", num(r.margin)},
              {"worst_l", r.worst_l},
              {"worst_tilde_k", vec(r.worst_tilde_k)},
              {"worst_tilde_m", vec(r.worst_tilde_m)},
              {"worst_kappa", num(r.worst_kappa)},
              {"worst_ineq_value", num(r.worst_ineq_value)},
              {"required", vec(r.required)},
              {"candidates_tested", r.candidates_tested},
              {"search", search_name(r.search)},
              {"unit_choice_max", num(r.unit_choice_max)}};
}

Json to_json(const ConditionReport& report) {
  return Json{{"pass", report.pass},
              {"condition_i", to_json(report.condition_i)},
              {"condition_ii", to_json(report.condition_ii)}};
}

Json to_json(const Certificate& c) {
  return Json{{"residual_norm", num(c.residual_norm)},
              {"feasibility_surplus", num(c.feasibility_surplus)},
              {"dual_violation", num(c.dual_violation)},
              {"sign_alignment", num(c.sign_alignment)},
              {"dual_objective", num(c.dual_objective)},
              {"dual_gap", num(c.dual_gap)},
              {"relative_gap", num(c.relative_gap)},
              {"support_size", c.support_size}};
}

Json to_json(const RecoveryResult& r) {
  return Json{{"objective", num(r.objective)},
              {"residual_norm", num(r.residual_norm)},
              {"primal_residual", num(r.primal_residual)},
              {"iterations", r.iterations},
              {"polished", r.polished},
              {"converged", r.converged},
              {"certificate", to_json(r.certificate)}};
}

void write_csv(std::ostream& os, const LevelTable& table) {
  os << "j,l,value\n";
  for (int j = 0; j < table.r; ++j) {
    for (int l = 0; l < table.r; ++l) os << j << ',' << l << ',' << format_double(table(j, l)) << '\n';
  }
}

void write_csv(std::ostream& os, std::span<const cplx> v) {
  os << "index,real,imag\n";
  for (std::size_t i = 0; i < v.size(); ++i) {
    os << i << ',' << format_double(v[i].real()) << ',' << format_double(v[i].imag()) << '\n';
  }
}

}  // namespace fhcs
