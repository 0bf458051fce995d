#include "rasdm/newsvendor.hpp"

#include <algorithm>
#include <cmath>

#include "rasdm/error.hpp"

namespace rasdm {

namespace {

void check_costs(double r_u, double r_v) {
  if (!(r_u >= 0.0 && r_v >= 0.0 && r_u + r_v > 0.0) || !std::isfinite(r_u + r_v))
    fail(ErrorKind::Invalid, "deviation costs must be non-negative with r_u + r_v > 0");
}

void check_kappa(double kappa, double beta_bar) {
  if (!(beta_bar > 0.0 && beta_bar <= 1.0)) fail(ErrorKind::Invalid, "beta_bar must lie in (0, 1]");
  if (!(kappa >= 0.0 && kappa <= 1.0 / beta_bar + 1e-12))
    fail(ErrorKind::Invalid, "kappa must lie in [0, 1/beta_bar]");
}

double pos(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

DeviationCosts to_deviation_costs(const NewsvendorParams& nv) {
  if (!(nv.e > nv.c && nv.c > nv.s)) fail(ErrorKind::Invalid, "newsvendor prices need e > c > s");
  return {nv.e - nv.c, nv.c - nv.s};
}

RiskCoefficients RiskCoefficients::of(double kappa, double beta_bar) {
  check_kappa(kappa, beta_bar);
  return {kappa, beta_bar, 1.0 / (1.0 + kappa * (1.0 - beta_bar))};
}

RiskCoefficients RiskCoefficients::of(const RiskSpec& spec) {
  spec.check();
  return of(spec.kappa, spec.beta_bar());
}

const char* to_string(TradingMode m) { return m == TradingMode::NoTrading ? "no_trading" : "with_trading"; }

double precommit_quantile_no_trading(double r_u, double r_v, double kappa, double beta_bar) {
  check_costs(r_u, r_v);
  check_kappa(kappa, beta_bar);
  return r_u / ((r_u + r_v) * (1.0 + kappa * (1.0 - beta_bar)));
}

double precommit_quantile_with_trading(double r_u, double r_v, double kappa, double beta_bar) {
  check_costs(r_u, r_v);
  check_kappa(kappa, beta_bar);
  const double k = kappa * (1.0 - beta_bar);
  return (r_u + (r_u + r_v) * k) / ((r_u + r_v) * (1.0 + k));
}

double precommit_quantile(TradingMode mode, double r_u, double r_v, double kappa, double beta_bar) {
  return mode == TradingMode::NoTrading ? precommit_quantile_no_trading(r_u, r_v, kappa, beta_bar)
                                        : precommit_quantile_with_trading(r_u, r_v, kappa, beta_bar);
}

double precommit_disutility(const PrecommitProblem& prob, const EmpiricalDistribution& dist, const RiskSpec& spec,
                            double x) {
  const double m = prob.margin > 0.0 ? prob.margin : prob.r_u + prob.r_v;
  std::vector<double> profit(dist.support.size());
  for (std::size_t k = 0; k < profit.size(); ++k) {
    const double X = dist.support[k];
    const double dev = prob.r_u * pos(X - x) + prob.r_v * pos(x - X);
    profit[k] = prob.mode == TradingMode::NoTrading ? m * X - dev : -(m * X + dev);
  }
  return rho_disutility(profit, dist.probs, spec);
}

BruteForceResult brute_force_precommit(const PrecommitProblem& prob, const EmpiricalDistribution& dist,
                                       const RiskSpec& spec, double tol) {
  check_costs(prob.r_u, prob.r_v);
  spec.check();
  if (dist.support.empty()) fail(ErrorKind::Invalid, "brute-force pre-commitment needs a non-empty support");
  BruteForceResult out;
  // the objective is piecewise linear with kinks only at support points
  for (std::size_t k = 0; k < dist.support.size(); ++k) {
    out.candidates.push_back(dist.support[k]);
    if (k + 1 < dist.support.size()) out.candidates.push_back(0.5 * (dist.support[k] + dist.support[k + 1]));
  }
  double best = INFINITY;
  for (double x : out.candidates) {
    out.values.push_back(precommit_disutility(prob, dist, spec, x));
    best = std::min(best, out.values.back());
  }
  const double band = tol * (1.0 + std::abs(best));
  for (std::size_t k = 0; k < out.candidates.size(); ++k)
    if (out.values[k] <= best + band) out.argmin.push_back(out.candidates[k]);
  out.value = best;
  out.x_star = out.argmin.front();
  return out;
}

BruteForceResult brute_force_precommit(const NewsvendorParams& nv, const EmpiricalDistribution& dist,
                                       const RiskSpec& spec, TradingMode mode, double tol) {
  const auto d = to_deviation_costs(nv);
  // p D - c x + s (x-D)+ - e (D-x)+ = (p - c) D - r_v (x-D)+ - r_u (D-x)+
  PrecommitProblem prob{d.r_u, d.r_v, mode == TradingMode::NoTrading ? nv.p - nv.c : nv.c, mode};
  if (prob.margin <= 0.0) fail(ErrorKind::Invalid, "newsvendor margin must be positive");
  return brute_force_precommit(prob, dist, spec, tol);
}

bool in_argmin(const PrecommitProblem& prob, const EmpiricalDistribution& dist, const RiskSpec& spec,
               const BruteForceResult& oracle, double x, double tol) {
  return precommit_disutility(prob, dist, spec, x) <= oracle.value + tol * (1.0 + std::abs(oracle.value));
}

double profit_lower_bound(double r_u, double r_v, double x_star, const RiskCoefficients& coeffs, TradingMode mode) {
  check_costs(r_u, r_v);
  if (!(x_star >= 0.0)) fail(ErrorKind::Invalid, "pre-commitment must be non-negative");
  const double slack = 1.0 - coeffs.alpha;
  return mode == TradingMode::NoTrading ? slack * r_u * x_star : -slack * r_v * x_star;
}

NewsvendorCheck check_newsvendor(const PrecommitProblem& prob, const EmpiricalDistribution& dist,
                                 const RiskSpec& spec, double tol) {
  NewsvendorCheck out;
  const auto rc = RiskCoefficients::of(spec);
  out.quantile = precommit_quantile(prob.mode, prob.r_u, prob.r_v, rc.kappa, rc.beta_bar);
  out.x_star = pseudoinverse_cdf(dist, out.quantile);
  out.oracle = brute_force_precommit(prob, dist, spec, tol);
  out.oracle_x_star = out.oracle.x_star;
  out.agree = in_argmin(prob, dist, spec, out.oracle, out.x_star, tol);
  return out;
}

}  // namespace rasdm
