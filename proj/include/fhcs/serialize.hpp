#pragma once

// JSON and CSV forms of the library's reports. Non-finite numbers (unbounded
// margins) are written as JSON null.

#include <iosfwd>
#include <span>

#include "json.hpp"

#include "fhcs/analysis.hpp"
#include "fhcs/bands.hpp"
#include "fhcs/solver.hpp"

namespace fhcs {

using Json = nlohmann::ordered_json;

Json to_json(const BandPlan& plan);
/// Throws ParameterError on missing fields or a plan that violates the band invariants.
BandPlan band_plan_from_json(const Json& j);

Json to_json(const LevelTable& table);  // nested rows, table[j][l]
Json to_json(const CoherenceProfile& profile);
Json to_json(const ConditionIReport& report);
Json to_json(const ConditionIIReport& report);
Json to_json(const ConditionReport& report);
Json to_json(const Certificate& cert);
Json to_json(const RecoveryResult& result);

/// Header "j,l,value", one row per entry.
void write_csv(std::ostream& os, const LevelTable& table);
/// Header "index,real,imag".
void write_csv(std::ostream& os, std::span<const cplx> v);

}  // namespace fhcs
