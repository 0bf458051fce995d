#pragma once

#include <span>
#include <string>
#include <vector>

#include "rasdm/lp.hpp"
#include "rasdm/model.hpp"
#include "rasdm/network.hpp"

namespace rasdm {

struct ScenarioDispatch {
  std::vector<double> X, U, V;  // per generator, MW
  std::vector<double> flow;     // per line, MW
  std::vector<double> angle;    // per node
  std::vector<double> lambda;   // per node, $/MWh
  std::vector<double> rho;      // per generator, marginal second-stage cost of x
  double cost = 0.0;            // c X + r_u U + r_v V
};

struct DispatchSolution {
  std::vector<double> x;
  std::vector<ScenarioDispatch> scenarios;
  double objective = 0.0;
  bool duals_resolved = false;
};

struct DispatchOptions {
  bool resolve_duals = true;
  lp::DualPreference preference = lp::DualPreference::Min;
  // pricing measure replacing P in the objective; prices are scaled by it
  std::vector<double> weights;
};

// throws Error(Infeasible) naming the first scenario that cannot be served
void check_scenarios_feasible(const MarketInstance& inst);

DispatchSolution solve_slp(const MarketInstance& inst, const DispatchOptions& opt = {});

ScenarioDispatch solve_recourse(const MarketInstance& inst, std::span<const double> x, int scenario,
                                lp::DualPreference pref = lp::DualPreference::Min);

struct SettlementReport {
  std::vector<double> generator_payment;  // lambda at the unit's node times X
  std::vector<double> consumer_charge;    // per node, lambda times demand
  double congestion_rent = 0.0;
  double iso_net = 0.0;
};

// throws Error(Numerical) if the ISO would be out of pocket
SettlementReport settle(const MarketInstance& inst, const ScenarioDispatch& d, int scenario);

// (lambda - c) X - r_u U - r_v V for one generator in one scenario
double generator_profit(const MarketInstance& inst, const ScenarioDispatch& d, int gen);
std::vector<double> profit_by_scenario(const MarketInstance& inst, const DispatchSolution& sol, int gen);

EmpiricalDistribution dispatch_distribution(const MarketInstance& inst, const DispatchSolution& sol,
                                            const std::string& gen_id);

struct SensitivityProbe {
  int scenario = 0;
  bool applicable = false;       // interior, deviating, binding set unchanged
  bool binding_changed = false;  // reported when the step was too large
  std::string reason;
  double d_lambda = 0.0;  // change of the price at the generator's node
  double d_rho = 0.0;
};

// compares recourse at x and x + delta e_gen in every scenario
std::vector<SensitivityProbe> price_sensitivity(const MarketInstance& inst, std::span<const double> x, double delta,
                                                int gen);

// cumulative pre-commitment of units that pay for deviations
double committed_total(const MarketInstance& inst, std::span<const double> x);

// reads one scenario block out of an LP solution; `scale` converts row duals to $/MWh
ScenarioDispatch read_block(const MarketInstance& inst, const ScenarioBlock& b, const lp::LpSolution& sol, double scale);

}  // namespace rasdm
