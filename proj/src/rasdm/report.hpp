#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rasdm/dispatch.hpp"
#include "rasdm/equilibrium.hpp"
#include "rasdm/io.hpp"
#include "rasdm/model.hpp"
#include "rasdm/newsvendor.hpp"
#include "rasdm/properties.hpp"
#include "rasdm/riskmarket.hpp"

namespace rasdm {

// Sorted keys, two-space indent, numbers at 12 significant digits, trailing
// newline.  Non-finite numbers become the strings "inf", "-inf", "nan".
std::string canonical_json(const Json& doc);
std::string format_number(double v);

std::string sha256_hex(std::string_view bytes);

// hash of the parsed document, so whitespace and key order do not matter;
// unparseable text is hashed as raw bytes
std::string content_hash(const std::string& text);

// one line of a report's "properties" block
struct ReportProperty {
  std::string name;
  double residual = 0.0;
  bool passed = true;
};

Json properties_json(const std::vector<ReportProperty>& props);

// {"command", "instance_hash", "tolerances", "result", "properties"}
Json envelope(const std::string& command, const std::string& hash, const Json& tolerances, Json result,
              const std::vector<ReportProperty>& props);

// line keys are "from-to", with "#k" appended when a pair repeats
std::vector<std::string> line_keys(const MarketInstance& inst);

Json scenario_json(const MarketInstance& inst, int scenario, const ScenarioDispatch& d);
// {"x": {...}, "scenarios": [...sorted by id...], "objective"}
Json dispatch_json(const MarketInstance& inst, const DispatchSolution& sol);
std::vector<ReportProperty> dispatch_properties(const MarketInstance& inst, const DispatchSolution& sol);

Json settlement_json(const MarketInstance& inst, const SettlementReport& s);

Json raslp_json(const MarketInstance& inst, const RiskMarketSolution& sol, const std::vector<double>& pi);
std::vector<ReportProperty> raslp_properties(const MarketInstance& inst, const RiskMarketSolution& sol,
                                             const std::vector<double>& pi);

Json candidate_json(const MarketInstance& inst, const EquilibriumCandidate& cand);
Json gap_report_json(const GapReport& rep);
Json fixed_point_json(const MarketInstance& inst, const FixedPointResult& res);

// Reads a candidate block ({"candidate": ...} or the block itself) or a
// solve-sdm report ({"result": {"x", "scenarios"}} or the dispatch itself).
EquilibriumCandidate candidate_from_json(const MarketInstance& inst, const Json& doc);

// pre-commitment vector from a JSON array, a {generator id: MW} map, or a
// solve-sdm report
std::vector<double> commitment_from_json(const MarketInstance& inst, const Json& doc);

Json property_reports_json(const std::vector<PropertyReport>& reps);

}  // namespace rasdm
