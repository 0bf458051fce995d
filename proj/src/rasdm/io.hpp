#pragma once

#include <string>

#include "json.hpp"
#include "rasdm/model.hpp"

namespace rasdm {

using Json = nlohmann::json;

// All parsers throw Error(Invalid) with a diagnostic on malformed input.
MarketInstance parse_instance(const Json& doc);
MarketInstance parse_instance_text(const std::string& text);
std::string read_file(const std::string& path);

AgentRisk parse_risk(const Json& doc, std::size_t scenarios);
Json risk_to_json(const AgentRisk& risk);

EmpiricalDistribution parse_distribution(const Json& doc);

}  // namespace rasdm
