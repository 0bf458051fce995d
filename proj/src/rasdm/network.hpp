#pragma once

#include <span>
#include <vector>

#include "rasdm/lp.hpp"
#include "rasdm/model.hpp"

namespace rasdm {

// Column and row indices of one scenario's second stage inside a larger LP.
struct ScenarioBlock {
  int scenario = 0;
  std::vector<int> X, U, V;  // per generator
  std::vector<int> F;        // per line
  std::vector<int> angle;    // per node
  std::vector<int> balance;  // per node, >= demand
  std::vector<int> flow;     // per line
  std::vector<int> link;     // per generator, pre-commitment coupling
  bool first_stage = false;  // link rows read x + U - V - X = 0 (else X - U + V = x)
};

// Adds the second stage of scenario w.  Deviation and fuel costs enter the
// objective scaled by `weight` (pass 0 to keep them out of the objective).
// With `xcols` the coupling is to first-stage columns, otherwise to the fixed
// values in `xfixed`.
ScenarioBlock add_scenario_block(lp::LinearProgram& prog, const MarketInstance& inst, int w, double weight,
                                 std::span<const int> xcols, std::span<const double> xfixed);

// Per-generator second-stage cost c X + r_u U + r_v V as (column, coefficient) pairs.
std::vector<std::pair<int, double>> block_cost_terms(const MarketInstance& inst, const ScenarioBlock& b);

// one slack bus per connected component
std::vector<int> slack_nodes(const Network& net);

// flow-polytope net inflow of each node: sum of incoming minus outgoing flows
std::vector<double> net_inflow(const Network& net, std::span<const double> flows);

}  // namespace rasdm
