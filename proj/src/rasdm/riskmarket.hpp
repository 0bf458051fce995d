#pragma once

#include <string>
#include <vector>

#include "rasdm/dispatch.hpp"
#include "rasdm/model.hpp"
#include "rasdm/risk.hpp"

namespace rasdm {

struct AgentRiskEntry {
  std::string agent;   // generator id or "iso"
  AgentRisk risk;
  std::string source;  // which instance key supplied it
};

// Generators use their own entry, then "default", then risk-neutral.  The ISO
// uses "iso", else the least risk-averse generator's set.
std::vector<AgentRiskEntry> agent_risks(const MarketInstance& inst);

struct RiskMarketSolution {
  DispatchSolution dispatch;  // prices here are per unit of pi
  std::vector<std::string> agents;
  std::vector<double> theta;
  std::vector<std::vector<double>> W;  // agent x scenario
  std::vector<double> pi;
  std::vector<double> membership;      // L1 distance of pi to each agent's set
  std::vector<std::string> mode;       // how each agent's risk rows were built
  int cut_rounds = 0;
  int cuts_added = 0;
  double objective = 0.0;
};

// How a spectral agent's risk constraint enters the master LP.  Auto uses the
// extreme points when they fit under the enumeration bound, else the epigraph
// (one threshold per spectrum level plus per-scenario excess variables).
// Cutting planes separate with the worst-case measure instead.
enum class RiskRows { Auto, ExtremePoints, CuttingPlanes, Epigraph };
const char* to_string(RiskRows m);

struct RaslpOptions {
  RiskRows rows = RiskRows::Auto;
  std::size_t enumeration_bound = 5000;
  double cut_tol = 1e-7;
  int max_cut_rounds = 500;
  bool resolve_duals = true;
};

// throws Error(EmptyIntersection) when the agents share no measure,
// Error(NotConverged) when the cut loop hits its cap
RiskMarketSolution solve_raslp(const MarketInstance& inst, const std::vector<AgentRiskEntry>& risks,
                               const RaslpOptions& opt = {});
RiskMarketSolution solve_raslp(const MarketInstance& inst, const RaslpOptions& opt = {});

// pi normalised and re-certified against every agent's set (Error(Numerical) on failure)
std::vector<double> extract_risk_adjusted_measure(const MarketInstance& inst, const std::vector<AgentRiskEntry>& risks,
                                                  const RiskMarketSolution& sol);

// W_a(w) - sum_v pi(v) W_a(v)
double security_settlement(const RiskMarketSolution& sol, int agent, int scenario);

// system disutility of the per-scenario cost of a dispatch policy
double risk_adjusted_system_objective(const MarketInstance& inst, const DispatchSolution& policy, const AgentRisk& risk);

}  // namespace rasdm
