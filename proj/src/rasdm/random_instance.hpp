#pragma once

#include <random>

#include "rasdm/model.hpp"

namespace rasdm {

struct RandomInstanceOptions {
  int max_nodes = 4;
  int max_generators = 4;
  int max_scenarios = 6;
  bool with_risk = false;     // attach a random spectral spec to every agent
  bool risk_neutral = false;  // attach kappa = 0 to every agent
  double line_capacity_min = 40.0;
};

// Seeded generator of small feasible instances for property suites.
// Demands and capacities are integers so degenerate ties are common.
MarketInstance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& opt = {});

RiskSpec random_risk_spec(std::mt19937_64& rng);

}  // namespace rasdm
