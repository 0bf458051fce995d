#pragma once

#include <vector>

#include "rasdm/model.hpp"
#include "rasdm/risk.hpp"

namespace rasdm {

// p sale price, c ordering cost, s salvage value, e emergency order cost
struct NewsvendorParams {
  double p = 0.0;
  double c = 0.0;
  double s = 0.0;
  double e = 0.0;
};

struct DeviationCosts {
  double r_u;
  double r_v;
};

// under-commitment is covered at e, over-commitment salvaged at s:
// r_u = e - c, r_v = c - s, so r_u + r_v = e - s.  Needs e > c > s.
DeviationCosts to_deviation_costs(const NewsvendorParams& nv);

struct RiskCoefficients {
  double kappa = 0.0;
  double beta_bar = 1.0;
  double alpha = 1.0;  // 1 / (1 + kappa (1 - beta_bar))

  static RiskCoefficients of(const RiskSpec& spec);
  static RiskCoefficients of(double kappa, double beta_bar);
};

enum class TradingMode { NoTrading, WithTrading };
const char* to_string(TradingMode m);

// the CDF level at which a risk-averse generator pre-commits
double precommit_quantile_no_trading(double r_u, double r_v, double kappa, double beta_bar);
double precommit_quantile_with_trading(double r_u, double r_v, double kappa, double beta_bar);
double precommit_quantile(TradingMode mode, double r_u, double r_v, double kappa, double beta_bar);

// Profit of pre-committing x when dispatch turns out X:
//   no trading:   margin*X - r_u (X - x)+ - r_v (x - X)+, minimise rho of it
//   with trading: cost margin*X + r_u (X - x)+ + r_v (x - X)+, minimise rho of -cost
// margin <= 0 selects the default r_u + r_v, which keeps profit (cost) moving
// with X so the risk tail sits where the closed forms expect it.
struct PrecommitProblem {
  double r_u = 0.0;
  double r_v = 0.0;
  double margin = 0.0;
  TradingMode mode = TradingMode::NoTrading;
};

struct BruteForceResult {
  double x_star = 0.0;              // smallest minimiser
  double value = 0.0;               // minimal disutility
  std::vector<double> candidates;   // support points and midpoints, ascending
  std::vector<double> values;       // disutility at each candidate
  std::vector<double> argmin;       // candidates within tolerance of the minimum
};

double precommit_disutility(const PrecommitProblem& prob, const EmpiricalDistribution& dist, const RiskSpec& spec,
                            double x);

BruteForceResult brute_force_precommit(const PrecommitProblem& prob, const EmpiricalDistribution& dist,
                                       const RiskSpec& spec, double tol = 1e-9);
// newsvendor form: no trading maximises p D - c x + s (x - D)+ - e (D - x)+,
// with trading is the system view with p = 0
BruteForceResult brute_force_precommit(const NewsvendorParams& nv, const EmpiricalDistribution& dist,
                                       const RiskSpec& spec, TradingMode mode, double tol = 1e-9);

// whether x attains the oracle minimum (x need not be a grid point)
bool in_argmin(const PrecommitProblem& prob, const EmpiricalDistribution& dist, const RiskSpec& spec,
               const BruteForceResult& oracle, double x, double tol = 1e-9);

// (1 - alpha) r_u x* without trading, -(1 - alpha) r_v x* with it
double profit_lower_bound(double r_u, double r_v, double x_star, const RiskCoefficients& coeffs, TradingMode mode);

struct NewsvendorCheck {
  double quantile = 0.0;
  double x_star = 0.0;         // pseudo-inverse at the closed-form quantile
  double oracle_x_star = 0.0;  // smallest brute-force minimiser
  bool agree = false;          // x_star is among the minimisers
  BruteForceResult oracle;
};

NewsvendorCheck check_newsvendor(const PrecommitProblem& prob, const EmpiricalDistribution& dist,
                                 const RiskSpec& spec, double tol = 1e-9);

}  // namespace rasdm
