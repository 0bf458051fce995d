#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rasdm/dispatch.hpp"
#include "rasdm/model.hpp"
#include "rasdm/risk.hpp"
#include "rasdm/riskmarket.hpp"

namespace rasdm {

// lambda[w][n], $/MWh, inside [0, VOLL]
struct PriceField {
  std::vector<std::vector<double>> lambda;

  static PriceField from_dispatch(const DispatchSolution& sol);
  // throws Error(Invalid) on wrong shape or prices outside [0, VOLL]
  void check(const MarketInstance& inst) const;
};

struct GeneratorStrategy {
  double x = 0.0;
  std::vector<double> X, U, V;  // per scenario
};

struct BestResponse {
  GeneratorStrategy strategy;
  double value = 0.0;  // -rho of the profit, i.e. risk-adjusted profit
};

// Restrictions on a generator's own choices.  With `dispatch` the unit only
// picks x and settles the given X; with `x` the pre-commitment is pinned.
struct ResponseLimits {
  std::vector<double> dispatch;
  std::optional<double> x;
};

// profit (lambda - c) X - r_u U - r_v V per scenario
std::vector<double> strategy_profit(const MarketInstance& inst, const PriceField& prices, int gen,
                                    const GeneratorStrategy& s);
double strategy_value(const MarketInstance& inst, const PriceField& prices, int gen, const GeneratorStrategy& s,
                      const AgentRisk& risk);

// Maximises -rho of the profit over 0 <= x <= max_w G(w), 0 <= X <= G(w),
// X = x + U - V.  Among optimal strategies the smallest x is returned.
BestResponse best_response_generator(const MarketInstance& inst, const PriceField& prices, int gen,
                                     const AgentRisk& risk, const ResponseLimits& limits = {});

// ISO flow for one scenario: maximises sum_n lambda_n tau_n(F) over the DC
// flow polytope; ties go to the flow of least total magnitude
std::vector<double> best_response_iso(const MarketInstance& inst, std::span<const double> lambda);
double iso_value(const MarketInstance& inst, std::span<const double> lambda, std::span<const double> flow);

// generation plus net inflow minus demand, per node
std::vector<double> excess_supply(const MarketInstance& inst, int scenario, std::span<const double> X,
                                  std::span<const double> flow);

// VOLL where excess < -tol, 0 where excess > tol, unchanged otherwise
std::vector<double> best_response_market_clearing(std::span<const double> excess, std::span<const double> lambda,
                                                  double voll, double tol = 1e-9);

struct EquilibriumCandidate {
  PriceField prices;
  std::vector<GeneratorStrategy> generators;
  std::vector<std::vector<double>> flows;  // [w][line]
  std::vector<double> gaps;                // per generator, then ISO, then market clearing
  double max_gap = 0.0;
};

EquilibriumCandidate candidate_from_dispatch(const MarketInstance& inst, const DispatchSolution& sol);

struct AgentGap {
  std::string agent;
  double best_value = 0.0;
  double candidate_value = 0.0;
  double gap = 0.0;
};

struct GapReport {
  std::vector<AgentGap> agents;
  double max_gap = 0.0;
  bool equilibrium = false;
};

// Re-solves every agent's best response at the candidate's prices.  Generators
// use `risks[i]` (same order as the instance), ISO and market clearing are
// risk-neutral expectations over P.
GapReport verify_equilibrium(const MarketInstance& inst, const EquilibriumCandidate& cand,
                             const std::vector<AgentRisk>& risks, double tol = 1e-6);

struct FixedPointOptions {
  double damping = 0.5;
  int max_iters = 100;
  double tol = 1e-6;
};

struct IterationRecord {
  int iter = 0;
  std::vector<double> nu;  // pricing measure used in this sweep
  std::vector<double> x;
  PriceField prices;
  std::vector<double> gaps;
  double max_gap = 0.0;
  double step = 0.0;  // L1 distance to the target measure
};

struct FixedPointResult {
  EquilibriumCandidate best;
  bool converged = false;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  std::vector<EquilibriumCandidate> equilibria;  // distinct candidates with max gap <= tol
};

// Damped fixed point on a common pricing measure nu, seeded at P: dispatch by
// the nu-weighted stochastic program, price at its duals, then move nu toward
// the mean worst-case measure of the generators' profits.  Never throws on
// non-convergence; the gaps say how good the answer is.
FixedPointResult iterate_fixed_point(const MarketInstance& inst, const std::vector<AgentRisk>& risks,
                                     const FixedPointOptions& opt = {});

// generator risks in instance order, resolved as in the risk market
std::vector<AgentRisk> generator_risks(const MarketInstance& inst);

}  // namespace rasdm
