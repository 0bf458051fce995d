#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rasdm/lp.hpp"
#include "rasdm/model.hpp"
#include "rasdm/newsvendor.hpp"
#include "rasdm/risk.hpp"

namespace rasdm {

struct PropertyCheck {
  std::string name;
  bool passed = true;
  double residual = 0.0;  // worst violation seen, 0 when none
  int trials = 0;
  std::string detail;
  bool informational = false;  // reported but not counted toward the verdict
};

struct PropertyReport {
  std::string suite;
  std::vector<PropertyCheck> checks;

  bool passed() const;
};

struct PropertyOptions {
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int trials = 20;
};

const std::vector<std::string>& property_suites();

// Runs one suite ("all" runs every suite).  Throws Error(Invalid) naming the
// available suites when `suite` is unknown.
std::vector<PropertyReport> check_properties(const MarketInstance& inst, const std::string& suite,
                                             const PropertyOptions& opt = {});

// min over scenarios of <x - xh, rho(x) - rho(xh)> with resolved duals
double monotone_rho_residual(const MarketInstance& inst, std::span<const double> x, std::span<const double> xh);

// min over scenarios of <D' - D, lambda(D') - lambda(D)> at fixed x, where D'
// adds `extra` to scenario w's demand; +inf when D' cannot be served
double monotone_price_residual(const MarketInstance& inst, std::span<const double> x, int w,
                               std::span<const double> extra);

struct Corollary2Tally {
  int probes = 0;
  int applicable = 0;
  int magnitude_violations = 0;
  int sign_violations = 0;
  double worst = 0.0;  // largest distance of |d lambda| from {0, r_u + r_v}
};

// probes x -> x + delta e_gen in every scenario; only probes with an interior,
// deviating unit and an unchanged binding set are judged
void probe_corollary2(const MarketInstance& inst, std::span<const double> x, int gen, double delta, double tol,
                      Corollary2Tally& tally);

// Expected-profit bound check on a single-node, single-unit instance where
// dispatch equals demand.  Realized profit uses recourse prices picked by `pref`.
struct ProfitBoundCase {
  MarketInstance inst;
  RiskSpec spec;
  TradingMode mode = TradingMode::NoTrading;
  double quantile = 0.0;
  double x_star = 0.0;
  double atom_excess = 0.0;  // F(x*) - quantile; 0 means no atom past the quantile
  double expected_profit = 0.0;
  double bound = 0.0;
  bool holds = false;
};

ProfitBoundCase evaluate_profit_bound(const MarketInstance& inst, const RiskSpec& spec, TradingMode mode,
                                      lp::DualPreference pref = lp::DualPreference::Min, double tol = 1e-6);

// fine demand grid whose CDF reaches the closed-form quantile exactly at a support point
ProfitBoundCase random_profit_bound_case(std::mt19937_64& rng, TradingMode mode, double tol = 1e-6);

// the single-node example at kappa = 1, beta = 0.5 without trading: F(30) = 0.6
// overshoots the 0.5 quantile, and the low price at D = x* breaks the bound
ProfitBoundCase atom_counter_case();

}  // namespace rasdm
