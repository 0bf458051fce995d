#include "rasdm/properties.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "rasdm/dispatch.hpp"
#include "rasdm/equilibrium.hpp"
#include "rasdm/error.hpp"
#include "rasdm/riskmarket.hpp"

namespace rasdm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// accumulates the worst violation of "value >= -tol"
struct Worst {
  double residual = 0.0;
  int trials = 0;
  int skipped = 0;

  void lower(double value) {
    ++trials;
    if (value < 0.0) residual = std::max(residual, -value);
  }
  void within(double err) {
    ++trials;
    residual = std::max(residual, std::abs(err));
  }
  PropertyCheck check(std::string name, double tol, std::string detail = {}) const {
    PropertyCheck c;
    c.name = std::move(name);
    c.residual = residual;
    c.trials = trials;
    c.passed = residual <= tol;
    c.detail = std::move(detail);
    if (skipped) c.detail += (c.detail.empty() ? "" : "; ") + std::to_string(skipped) + " infeasible draws skipped";
    return c;
  }
};

std::vector<double> random_x(std::mt19937_64& rng, const MarketInstance& inst) {
  std::vector<double> x;
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const double cap = inst.max_capacity(static_cast<int>(i));
    x.push_back(std::round(std::uniform_real_distribution<double>(0.0, cap)(rng)));
  }
  return x;
}

bool infeasible(const Error& e) { return e.kind() == ErrorKind::Infeasible; }

double expectation_of(std::span<const double> v, std::span<const double> p) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += p[k] * v[k];
  return s;
}

PropertyReport monotonicity(const MarketInstance& inst, const PropertyOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  Worst prop1, remark3, kkt, bounds;
  const std::size_t ns = inst.scenarios.size(), nn = inst.network.nodes.size();
  for (int t = 0; t < opt.trials; ++t) {
    const auto x = random_x(rng, inst), xh = random_x(rng, inst);
    try {
      prop1.lower(monotone_rho_residual(inst, x, xh) + opt.tol);
    } catch (const Error& e) {
      if (!infeasible(e)) throw;
      ++prop1.skipped;
    }
    const int w = std::uniform_int_distribution<int>(0, static_cast<int>(ns) - 1)(rng);
    std::vector<double> extra(nn);
    for (double& v : extra) v = 5.0 * std::uniform_int_distribution<int>(0, 2)(rng);
    try {
      const double r = monotone_price_residual(inst, x, w, extra);
      if (std::isinf(r)) ++remark3.skipped;
      else remark3.lower(r + opt.tol);

      const auto d = solve_recourse(inst, x, w);
      for (std::size_t i = 0; i < inst.generators.size(); ++i) {
        const auto& g = inst.generators[i];
        // an inflexible unit's coupling row is free of deviation columns, so its dual is unbounded
        if (g.inflexible) continue;
        bounds.lower(d.rho[i] + g.ramp_up + opt.tol);
        bounds.lower(g.ramp_down - d.rho[i] + opt.tol);
        if (d.X[i] > 1e-7 && d.X[i] < g.capacity[w] - 1e-7)
          kkt.within(std::max(0.0, std::abs(d.lambda[g.node] + d.rho[i] - g.cost) - opt.tol));
      }
    } catch (const Error& e) {
      if (!infeasible(e)) throw;
      ++remark3.skipped;
    }
  }
  PropertyReport r{"monotonicity", {}};
  r.checks.push_back(prop1.check("monotone_rho_in_x", 0.0, "<x - x', rho - rho'> >= -tol per scenario"));
  r.checks.push_back(remark3.check("monotone_lambda_in_demand", 0.0, "<D' - D, lambda' - lambda> >= -tol, D' >= D"));
  r.checks.push_back(kkt.check("interior_dispatch_kkt", 0.0, "lambda + rho = c for interior flexible units"));
  r.checks.push_back(bounds.check("rho_bounds", 0.0, "-r_u <= rho <= r_v for flexible units"));
  return r;
}

PropertyReport corollary2(const MarketInstance& inst, const PropertyOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::vector<int> flexible;
  for (std::size_t i = 0; i < inst.generators.size(); ++i)
    if (!inst.generators[i].inflexible) flexible.push_back(static_cast<int>(i));
  Corollary2Tally tally;
  int skipped = 0;
  for (int t = 0; t < opt.trials && !flexible.empty(); ++t) {
    const int gen = flexible[std::uniform_int_distribution<std::size_t>(0, flexible.size() - 1)(rng)];
    auto x = random_x(rng, inst);
    double delta = std::uniform_int_distribution<int>(1, 3)(rng) * (rng() % 2 ? 1.0 : -1.0);
    if (x[gen] + delta < 0.0) delta = -delta;
    try {
      probe_corollary2(inst, x, gen, delta, opt.tol, tally);
    } catch (const Error& e) {
      if (!infeasible(e)) throw;
      ++skipped;
    }
  }
  const std::string seen = std::to_string(tally.applicable) + " of " + std::to_string(tally.probes) +
                           " scenario probes applicable" +
                           (skipped ? "; " + std::to_string(skipped) + " infeasible draws skipped" : "");
  PropertyReport r{"corollary2", {}};
  PropertyCheck mag{"price_jump_magnitude", tally.magnitude_violations == 0, tally.worst, tally.applicable,
                    "|d lambda| in {0, r_u + r_v}; " + seen};
  PropertyCheck dir{"price_jump_direction", tally.sign_violations == 0, static_cast<double>(tally.sign_violations),
                    tally.applicable, "x up => lambda down and rho up; " + seen};
  r.checks.push_back(mag);
  r.checks.push_back(dir);
  return r;
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::vector<double> z(n);
  for (double& v : z) v = std::round(4.0 * u(rng)) / 4.0;
  return z;
}

PropertyReport coherence(const MarketInstance& inst, const PropertyOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  const auto probs = inst.probabilities();
  const std::size_t n = probs.size();
  Worst homog, trans, mono, sub, cert;
  std::uniform_real_distribution<double> u(0.0, 5.0), a(-20.0, 20.0);
  for (const auto& entry : agent_risks(inst)) {
    for (int t = 0; t < opt.trials; ++t) {
      const auto z1 = random_values(rng, n), z2 = random_values(rng, n);
      const double r1 = disutility(z1, probs, entry.risk), r2 = disutility(z2, probs, entry.risk);
      const double scale = 1.0 + std::abs(r1) + std::abs(r2);
      const double tt = u(rng), shift = a(rng);
      std::vector<double> scaled(n), moved(n), sum(n), dominated(n), cost(n);
      for (std::size_t k = 0; k < n; ++k) {
        scaled[k] = tt * z1[k];
        moved[k] = z1[k] + shift;
        sum[k] = z1[k] + z2[k];
        dominated[k] = z1[k] - u(rng);
        cost[k] = -z1[k];
      }
      homog.within((disutility(scaled, probs, entry.risk) - tt * r1) / (scale * (1.0 + tt)));
      trans.within((disutility(moved, probs, entry.risk) - (r1 - shift)) / (scale + std::abs(shift)));
      mono.lower((disutility(dominated, probs, entry.risk) - r1) / scale);
      sub.lower((r1 + r2 - disutility(sum, probs, entry.risk)) / scale);
      const auto mu = separating_measure(cost, probs, entry.risk);
      double mass = 0.0;
      for (double m : mu) {
        mass += m;
        cert.lower(m + 1e-15);
      }
      cert.within(mass - 1.0);
      cert.within((expectation_of(cost, mu) - r1) / scale);
    }
  }
  PropertyReport r{"coherence", {}};
  r.checks.push_back(homog.check("positive_homogeneity", 1e-10));
  r.checks.push_back(trans.check("translation", 1e-10));
  r.checks.push_back(mono.check("monotonicity", 1e-10));
  r.checks.push_back(sub.check("subadditivity", 1e-10));
  r.checks.push_back(cert.check("worst_case_measure_certifies", 1e-10, "measure is a probability and attains rho"));
  return r;
}

PropertyReport duality(const MarketInstance& inst, const PropertyOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  const auto probs = inst.probabilities();
  const std::size_t n = probs.size();
  Worst lpdual, qid, member;
  int too_many = 0;
  for (const auto& entry : agent_risks(inst)) {
    std::optional<PolyhedralRiskSet> set;
    if (const auto* spec = std::get_if<RiskSpec>(&entry.risk)) {
      try {
        set = extreme_points(*spec, probs);
      } catch (const Error&) {
        ++too_many;
      }
    } else {
      set = std::get<PolyhedralRiskSet>(entry.risk);
    }
    for (int t = 0; t < opt.trials; ++t) {
      const auto z = random_values(rng, n);
      const double rho = disutility(z, probs, entry.risk);
      std::vector<double> cost(n);
      for (std::size_t k = 0; k < n; ++k) cost[k] = -z[k];
      if (set) lpdual.within((risk_value_lp(cost, *set) - rho) / (1.0 + std::abs(rho)));
      if (const auto* spec = std::get_if<RiskSpec>(&entry.risk))
        for (const auto& sp : spec->spectrum)
          qid.within(q_beta(z, probs, sp.beta) - sp.beta * (expectation_of(z, probs) - lower_tail_mean(z, probs, sp.beta)));
      member.lower(-membership_residual(separating_measure(cost, probs, entry.risk), probs, entry.risk) + 1e-8);
    }
  }
  PropertyReport r{"duality", {}};
  r.checks.push_back(lpdual.check("rho_equals_extreme_point_lp", 1e-9,
                                  too_many ? std::to_string(too_many) + " spectra above the enumeration bound" : ""));
  r.checks.push_back(qid.check("q_beta_tail_identity", 1e-10, "q_beta = beta (E[Z] - lower tail mean)"));
  r.checks.push_back(member.check("worst_case_measure_in_risk_set", 0.0));
  return r;
}

PropertyReport settlement(const MarketInstance& inst, const PropertyOptions& opt) {
  const auto sol = solve_slp(inst);
  const auto p = inst.probabilities();
  Worst surplus, recovery, link, prices;
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
    const auto& d = sol.scenarios[w];
    try {
      surplus.lower(settle(inst, d, static_cast<int>(w)).iso_net + 1e-6);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical) throw;
      surplus.lower(-kInf);
    }
    for (std::size_t i = 0; i < inst.generators.size(); ++i)
      link.within(std::max(0.0, std::abs(sol.x[i] + d.U[i] - d.V[i] - d.X[i]) - opt.tol));
    for (double l : d.lambda) {
      prices.lower(l + opt.tol);
      prices.lower(inst.network.voll - l + opt.tol);
    }
  }
  for (std::size_t i = 0; i < inst.generators.size(); ++i)
    recovery.lower(expectation_of(profit_by_scenario(inst, sol, static_cast<int>(i)), p) + 1e-6);

  PropertyReport r{"settlement", {}};
  r.checks.push_back(surplus.check("merchandising_surplus_nonnegative", 0.0));
  r.checks.push_back(recovery.check("cost_recovery_in_expectation", 0.0));
  r.checks.push_back(link.check("nonanticipativity", 0.0, "x + U - V = X"));
  r.checks.push_back(prices.check("prices_within_voll", 0.0));

  if (!inst.has_risk_block) return r;
  try {
    const auto risks = agent_risks(inst);
    const auto rm = solve_raslp(inst, risks);
    Worst clear, pay, pi;
    double total = 0.0;
    for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
      double c = 0.0, s = 0.0;
      for (std::size_t a = 0; a < rm.W.size(); ++a) {
        c += rm.W[a][w];
        s += security_settlement(rm, static_cast<int>(a), static_cast<int>(w));
      }
      clear.within(std::max(0.0, std::abs(c) - opt.tol));
      pay.within(std::max(0.0, std::abs(s) - opt.tol));
      pi.lower(rm.pi[w] + opt.tol);
      total += rm.pi[w];
    }
    pi.within(std::max(0.0, std::abs(total - 1.0) - opt.tol));
    for (double m : rm.membership) pi.lower(1e-7 - m);
    r.checks.push_back(clear.check("securities_clear", 0.0, "sum over agents of W(w) = 0"));
    r.checks.push_back(pay.check("security_settlements_balance", 0.0));
    r.checks.push_back(pi.check("risk_adjusted_measure_valid", 0.0, "pi >= 0, sums to 1, in every agent's set"));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyIntersection) throw;
    PropertyCheck c{"risk_market", true, 0.0, 0, e.what(), true};
    r.checks.push_back(c);
  }
  return r;
}

PropertyReport profit_bounds(const MarketInstance& inst, const PropertyOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  Worst none, with;
  for (int t = 0; t < opt.trials; ++t) {
    const auto mode = t % 2 ? TradingMode::WithTrading : TradingMode::NoTrading;
    const auto c = random_profit_bound_case(rng, mode);
    (mode == TradingMode::NoTrading ? none : with).lower(c.expected_profit - c.bound + 1e-6);
  }
  PropertyReport r{"profit_bounds", {}};
  r.checks.push_back(none.check("profit_bound_no_trading", 0.0, "E[profit] >= (1 - alpha) r_u x* on grids with F(x*) = q"));
  r.checks.push_back(with.check("profit_bound_with_trading", 0.0, "E[profit] >= -(1 - alpha) r_v x* on grids with F(x*) = q"));

  const auto atom = atom_counter_case();
  PropertyCheck a{"atom_at_x_star_caveat", atom.holds, std::max(0.0, atom.bound - atom.expected_profit), 1,
                  "single-node example, kappa 1, beta 0.5: F(x*) - q = " + std::to_string(atom.atom_excess) +
                      ", E[profit] " + std::to_string(atom.expected_profit) + " vs bound " + std::to_string(atom.bound),
                  true};
  r.checks.push_back(a);

  // the instance itself, when it is a single-node single-unit market
  if (inst.network.nodes.size() == 1 && inst.generators.size() == 1) {
    const auto risk = generator_risks(inst)[0];
    if (const auto* spec = std::get_if<RiskSpec>(&risk)) {
      for (auto mode : {TradingMode::NoTrading, TradingMode::WithTrading}) {
        const auto c = evaluate_profit_bound(inst, *spec, mode);
        PropertyCheck k{std::string("instance_profit_bound_") + to_string(mode), c.holds,
                        std::max(0.0, c.bound - c.expected_profit), 1,
                        "F(x*) - q = " + std::to_string(c.atom_excess) + "; atoms past the quantile void the bound",
                        c.atom_excess > 1e-12};
        r.checks.push_back(k);
      }
    }
  }
  return r;
}

PropertyReport equilibrium(const MarketInstance& inst, const PropertyOptions& opt) {
  PropertyReport r{"equilibrium", {}};
  const auto sol = solve_slp(inst);
  const std::vector<AgentRisk> neutral(inst.generators.size(), RiskSpec::neutral());
  const auto rep = verify_equilibrium(inst, candidate_from_dispatch(inst, sol), neutral, 1e-6);
  r.checks.push_back({"risk_neutral_dispatch_is_equilibrium", rep.equilibrium, rep.max_gap, 1, "max agent gap at tol 1e-6"});
  if (!inst.has_risk_block) return r;
  FixedPointOptions fo;
  fo.max_iters = std::max(opt.trials, 50);
  const auto risks = generator_risks(inst);
  const auto fp = iterate_fixed_point(inst, risks, fo);
  r.checks.push_back({"fixed_point_gap", fp.converged, fp.best.max_gap, fp.iterations,
                      fp.converged ? "converged" : "iteration cap reached; best candidate reported", true});
  Worst value;
  for (std::size_t i = 0; i < inst.generators.size(); ++i)
    value.lower(strategy_value(inst, fp.best.prices, static_cast<int>(i), fp.best.generators[i], risks[i]) + 1e-6);
  auto c = value.check("equilibrium_value_nonnegative", 0.0);
  c.informational = !fp.converged;
  r.checks.push_back(c);
  return r;
}

using Suite = std::function<PropertyReport(const MarketInstance&, const PropertyOptions&)>;

const std::vector<std::pair<std::string, Suite>>& suites() {
  static const std::vector<std::pair<std::string, Suite>> s{
      {"monotonicity", monotonicity}, {"corollary2", corollary2},       {"coherence", coherence},
      {"duality", duality},           {"settlement", settlement},       {"profit_bounds", profit_bounds},
      {"equilibrium", equilibrium},
  };
  return s;
}

MarketInstance single_node(const std::vector<double>& demand, const std::vector<double>& probs, double c, double ru,
                           double rv, double cap) {
  MarketInstance inst;
  inst.network.nodes = {"N"};
  inst.network.voll = 1000.0;
  inst.generators.push_back({"G", 0, c, ru, rv, false, std::vector<double>(demand.size(), cap)});
  for (std::size_t w = 0; w < demand.size(); ++w) {
    Scenario sc;
    sc.id = "d" + std::to_string(w);
    sc.prob.value = probs[w];
    sc.demand = {demand[w]};
    inst.scenarios.push_back(std::move(sc));
  }
  return inst;
}

}  // namespace

bool PropertyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.informational || c.passed; });
}

const std::vector<std::string>& property_suites() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, f] : suites()) n.push_back(k);
    n.push_back("all");
    return n;
  }();
  return names;
}

std::vector<PropertyReport> check_properties(const MarketInstance& inst, const std::string& suite,
                                             const PropertyOptions& opt) {
  std::vector<PropertyReport> out;
  bool known = suite == "all";
  require_valid(inst);
  for (const auto& [name, run] : suites()) {
    if (suite != "all" && suite != name) continue;
    known = true;
    out.push_back(run(inst, opt));
  }
  if (!known) {
    std::string list;
    for (const auto& n : property_suites()) list += (list.empty() ? "" : ", ") + n;
    fail(ErrorKind::Invalid, "unknown suite '" + suite + "'; available: " + list);
  }
  return out;
}

double monotone_rho_residual(const MarketInstance& inst, std::span<const double> x, std::span<const double> xh) {
  double worst = kInf;
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
    const auto a = solve_recourse(inst, x, static_cast<int>(w));
    const auto b = solve_recourse(inst, xh, static_cast<int>(w));
    double ip = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) ip += (x[i] - xh[i]) * (a.rho[i] - b.rho[i]);
    worst = std::min(worst, ip);
  }
  return worst;
}

double monotone_price_residual(const MarketInstance& inst, std::span<const double> x, int w,
                               std::span<const double> extra) {
  auto more = inst;
  for (std::size_t k = 0; k < extra.size(); ++k) more.scenarios.at(w).demand[k] += extra[k];
  const auto a = solve_recourse(inst, x, w);
  ScenarioDispatch b;
  try {
    b = solve_recourse(more, x, w);
  } catch (const Error& e) {
    if (!infeasible(e)) throw;
    return kInf;
  }
  double ip = 0.0;
  for (std::size_t k = 0; k < extra.size(); ++k) ip += extra[k] * (b.lambda[k] - a.lambda[k]);
  return ip;
}

void probe_corollary2(const MarketInstance& inst, std::span<const double> x, int gen, double delta, double tol,
                      Corollary2Tally& tally) {
  const auto& g = inst.generators.at(gen);
  const double jump = g.ramp_up + g.ramp_down;
  for (const auto& p : price_sensitivity(inst, x, delta, gen)) {
    ++tally.probes;
    if (!p.applicable) continue;
    ++tally.applicable;
    const double off = std::min(std::abs(p.d_lambda), std::abs(std::abs(p.d_lambda) - jump));
    tally.worst = std::max(tally.worst, off);
    if (off > tol) ++tally.magnitude_violations;
    if (delta * p.d_lambda > tol || delta * p.d_rho < -tol) ++tally.sign_violations;
  }
}

ProfitBoundCase evaluate_profit_bound(const MarketInstance& inst, const RiskSpec& spec, TradingMode mode,
                                      lp::DualPreference pref, double tol) {
  if (inst.network.nodes.size() != 1 || inst.generators.size() != 1)
    fail(ErrorKind::Invalid, "profit bound check needs a single-node, single-unit instance");
  const auto& g = inst.generators[0];
  const auto probs = inst.probabilities();
  std::vector<double> demand;
  for (const auto& sc : inst.scenarios) demand.push_back(sc.demand[0]);
  const auto dist = make_distribution(demand, probs);
  const auto coeffs = RiskCoefficients::of(spec);

  ProfitBoundCase c;
  c.inst = inst;
  c.spec = spec;
  c.mode = mode;
  c.quantile = precommit_quantile(mode, g.ramp_up, g.ramp_down, coeffs.kappa, coeffs.beta_bar);
  c.x_star = pseudoinverse_cdf(dist, c.quantile);
  c.atom_excess = dist.cdf(c.x_star) - c.quantile;
  const std::vector<double> x{c.x_star};
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w)
    c.expected_profit += probs[w] * generator_profit(inst, solve_recourse(inst, x, static_cast<int>(w), pref), 0);
  c.bound = profit_lower_bound(g.ramp_up, g.ramp_down, c.x_star, coeffs, mode);
  c.holds = c.expected_profit >= c.bound - tol;
  return c;
}

ProfitBoundCase random_profit_bound_case(std::mt19937_64& rng, TradingMode mode, double tol) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double ru = 1.0 + std::round(190.0 * u(rng)) / 10.0;
  const double rv = 1.0 + std::round(190.0 * u(rng)) / 10.0;
  // c > r_v keeps the price of a unit backing down at c - r_v >= 0
  const double c = rv + 1.0 + std::round(300.0 * u(rng)) / 10.0;
  const double beta = std::uniform_int_distribution<int>(1, 9)(rng) / 10.0;
  const RiskSpec spec{u(rng) / beta, {{beta, 1.0}}};
  const double q = precommit_quantile(mode, ru, rv, spec.kappa, beta);

  const int n = std::uniform_int_distribution<int>(40, 80)(rng);
  const int k = std::clamp(static_cast<int>(std::lround(q * n)), 1, n - 1);
  std::vector<double> demand, raw(n), probs(n);
  double lo = 0.0, hi = 0.0;
  for (int j = 0; j < n; ++j) {
    demand.push_back(2.0 * (j + 1));
    raw[j] = 0.2 + u(rng);
    (j < k ? lo : hi) += raw[j];
  }
  // the first k grid points carry exactly q
  for (int j = 0; j < n; ++j) probs[j] = j < k ? q * raw[j] / lo : (1.0 - q) * raw[j] / hi;
  return evaluate_profit_bound(single_node(demand, probs, c, ru, rv, 2.0 * n + 10.0), spec, mode,
                               lp::DualPreference::Min, tol);
}

ProfitBoundCase atom_counter_case() {
  const auto inst = single_node({10, 20, 30, 40, 50}, {0.2, 0.2, 0.2, 0.2, 0.2}, 10.0, 3.0, 1.0, 100.0);
  return evaluate_profit_bound(inst, RiskSpec{1.0, {{0.5, 1.0}}}, TradingMode::NoTrading);
}

}  // namespace rasdm
