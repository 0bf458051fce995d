#include "rasdm/dispatch.hpp"

#include <algorithm>
#include <cmath>

#include "rasdm/error.hpp"

namespace rasdm {

namespace {

constexpr double kActive = 1e-7;

double clean(double v) { return std::abs(v) < 1e-11 ? 0.0 : v; }

void check_x(const MarketInstance& inst, std::span<const double> x) {
  if (x.size() != inst.generators.size())
    fail(ErrorKind::Invalid, "pre-commitment vector must have one entry per generator");
  for (double v : x)
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorKind::Invalid, "pre-commitment must be finite and >= 0");
}

std::vector<int> balance_rows(const std::vector<ScenarioBlock>& blocks) {
  std::vector<int> rows;
  for (const auto& b : blocks) rows.insert(rows.end(), b.balance.begin(), b.balance.end());
  return rows;
}

// flags of the physical inequalities that hold with equality; the probed unit's deviation signs excluded
std::vector<char> binding_set(const MarketInstance& inst, const ScenarioDispatch& d, int w, int probed) {
  std::vector<char> s;
  const auto tau = net_inflow(inst.network, d.flow);
  std::vector<double> supply(tau);
  for (std::size_t i = 0; i < inst.generators.size(); ++i) supply[inst.generators[i].node] += d.X[i];
  for (std::size_t k = 0; k < supply.size(); ++k) s.push_back(supply[k] - inst.scenarios[w].demand[k] <= kActive);
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    s.push_back(d.X[i] <= kActive);
    s.push_back(d.X[i] >= inst.generators[i].capacity[w] - kActive);
    if (static_cast<int>(i) != probed) {
      s.push_back(d.U[i] > kActive);
      s.push_back(d.V[i] > kActive);
    }
  }
  for (std::size_t l = 0; l < d.flow.size(); ++l) {
    const double cap = inst.network.lines[l].capacity;
    s.push_back(d.flow[l] >= cap - kActive);
    s.push_back(d.flow[l] <= -cap + kActive);
  }
  return s;
}

}  // namespace

ScenarioDispatch read_block(const MarketInstance& inst, const ScenarioBlock& b, const lp::LpSolution& sol,
                            double scale) {
  ScenarioDispatch d;
  const double sign = b.first_stage ? -1.0 : 1.0;
  for (std::size_t i = 0; i < b.X.size(); ++i) {
    double u = sol.x[b.U[i]], v = sol.x[b.V[i]];
    // a unit exactly at its pre-commitment settles with no deviation
    const double both = std::min(u, v);
    u -= both;
    v -= both;
    d.X.push_back(clean(sol.x[b.X[i]]));
    d.U.push_back(clean(u));
    d.V.push_back(clean(v));
    d.rho.push_back(scale > 0.0 ? clean(sign * sol.duals[b.link[i]] / scale) : 0.0);
    const auto& g = inst.generators[i];
    d.cost += g.cost * d.X.back() + g.ramp_up * d.U.back() + g.ramp_down * d.V.back();
  }
  for (int c : b.F) d.flow.push_back(clean(sol.x[c]));
  for (int c : b.angle) d.angle.push_back(clean(sol.x[c]));
  for (int r : b.balance) d.lambda.push_back(scale > 0.0 ? clean(sol.duals[r] / scale) : 0.0);
  return d;
}

void check_scenarios_feasible(const MarketInstance& inst) {
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
    lp::LinearProgram prog;
    std::vector<int> xc;
    for (std::size_t i = 0; i < inst.generators.size(); ++i)
      xc.push_back(prog.add_column(0.0, 0.0, inst.max_capacity(static_cast<int>(i))));
    add_scenario_block(prog, inst, static_cast<int>(w), 0.0, xc, {});
    const auto sol = lp::solve(prog);
    if (sol.status == lp::Status::Infeasible)
      fail(ErrorKind::Infeasible, "scenario " + inst.scenarios[w].id + ": demand cannot be served within capacity and line limits");
  }
}

DispatchSolution solve_slp(const MarketInstance& inst, const DispatchOptions& opt) {
  require_valid(inst);
  const std::size_t ng = inst.generators.size(), ns = inst.scenarios.size();
  std::vector<double> weight = inst.probabilities();
  if (!opt.weights.empty()) {
    if (opt.weights.size() != ns) fail(ErrorKind::Invalid, "pricing measure must have one weight per scenario");
    weight = opt.weights;
  }

  lp::LinearProgram prog;
  std::vector<int> xc;
  for (std::size_t i = 0; i < ng; ++i)
    xc.push_back(prog.add_column(0.0, 0.0, inst.max_capacity(static_cast<int>(i)), "x_" + inst.generators[i].id));
  std::vector<ScenarioBlock> blocks;
  for (std::size_t w = 0; w < ns; ++w) blocks.push_back(add_scenario_block(prog, inst, static_cast<int>(w), weight[w], xc, {}));

  auto sol = lp::solve(prog);
  if (sol.status == lp::Status::Infeasible) {
    check_scenarios_feasible(inst);
    fail(ErrorKind::Infeasible, "no pre-commitment serves every scenario (inflexible units cannot follow demand)");
  }
  if (!sol.optimal()) fail(ErrorKind::Numerical, std::string("stochastic dispatch LP: ") + lp::to_string(sol.status));

  DispatchSolution out;
  if (opt.resolve_duals) {
    sol = lp::resolve_degenerate_duals(prog, sol, opt.preference, balance_rows(blocks));
    out.duals_resolved = true;
  }
  for (int c : xc) out.x.push_back(clean(sol.x[c]));
  const auto p = inst.probabilities();
  for (std::size_t w = 0; w < ns; ++w) {
    out.scenarios.push_back(read_block(inst, blocks[w], sol, weight[w]));
    out.objective += p[w] * out.scenarios.back().cost;
  }
  return out;
}

ScenarioDispatch solve_recourse(const MarketInstance& inst, std::span<const double> x, int scenario,
                                lp::DualPreference pref) {
  check_x(inst, x);
  if (scenario < 0 || scenario >= static_cast<int>(inst.scenarios.size())) fail(ErrorKind::Invalid, "unknown scenario");
  lp::LinearProgram prog;
  const auto b = add_scenario_block(prog, inst, scenario, 1.0, {}, x);
  auto sol = lp::solve(prog);
  if (sol.status == lp::Status::Infeasible)
    fail(ErrorKind::Infeasible, "scenario " + inst.scenarios[scenario].id + ": infeasible at the given pre-commitment");
  if (!sol.optimal()) fail(ErrorKind::Numerical, std::string("recourse LP: ") + lp::to_string(sol.status));
  sol = lp::resolve_degenerate_duals(prog, sol, pref, b.balance);
  return read_block(inst, b, sol, 1.0);
}

SettlementReport settle(const MarketInstance& inst, const ScenarioDispatch& d, int scenario) {
  SettlementReport r;
  const auto& sc = inst.scenarios.at(scenario);
  double paid = 0.0, charged = 0.0;
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    r.generator_payment.push_back(d.lambda[inst.generators[i].node] * d.X[i]);
    paid += r.generator_payment.back();
  }
  for (std::size_t k = 0; k < sc.demand.size(); ++k) {
    r.consumer_charge.push_back(d.lambda[k] * sc.demand[k]);
    charged += r.consumer_charge.back();
  }
  for (std::size_t l = 0; l < d.flow.size(); ++l) {
    const auto& ln = inst.network.lines[l];
    r.congestion_rent += d.flow[l] * (d.lambda[ln.to] - d.lambda[ln.from]);
  }
  r.iso_net = clean(charged - paid);
  r.congestion_rent = clean(r.congestion_rent);
  if (r.iso_net < -1e-6 * (1.0 + charged))
    fail(ErrorKind::Numerical, "settlement leaves the ISO out of pocket in scenario " + sc.id);
  return r;
}

double generator_profit(const MarketInstance& inst, const ScenarioDispatch& d, int gen) {
  const auto& g = inst.generators.at(gen);
  return (d.lambda[g.node] - g.cost) * d.X[gen] - g.ramp_up * d.U[gen] - g.ramp_down * d.V[gen];
}

std::vector<double> profit_by_scenario(const MarketInstance& inst, const DispatchSolution& sol, int gen) {
  std::vector<double> z;
  for (const auto& d : sol.scenarios) z.push_back(generator_profit(inst, d, gen));
  return z;
}

EmpiricalDistribution dispatch_distribution(const MarketInstance& inst, const DispatchSolution& sol,
                                            const std::string& gen_id) {
  const int i = inst.generator_index(gen_id);
  if (i < 0) fail(ErrorKind::Invalid, "unknown generator " + gen_id);
  if (sol.scenarios.size() != inst.scenarios.size()) fail(ErrorKind::Invalid, "solution does not cover every scenario");
  std::vector<double> v;
  for (const auto& d : sol.scenarios) v.push_back(d.X[i]);
  return make_distribution(v, inst.probabilities());
}

std::vector<SensitivityProbe> price_sensitivity(const MarketInstance& inst, std::span<const double> x, double delta,
                                                int gen) {
  check_x(inst, x);
  if (gen < 0 || gen >= static_cast<int>(inst.generators.size())) fail(ErrorKind::Invalid, "unknown generator");
  std::vector<double> moved(x.begin(), x.end());
  moved[gen] += delta;
  check_x(inst, moved);
  const int node = inst.generators[gen].node;
  std::vector<SensitivityProbe> out;
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
    SensitivityProbe p;
    p.scenario = static_cast<int>(w);
    const auto a = solve_recourse(inst, x, p.scenario);
    const auto b = solve_recourse(inst, moved, p.scenario);
    p.d_lambda = clean(b.lambda[node] - a.lambda[node]);
    p.d_rho = clean(b.rho[gen] - a.rho[gen]);
    const double cap = inst.generators[gen].capacity[w];
    auto interior = [&](const ScenarioDispatch& d) { return d.X[gen] > kActive && d.X[gen] < cap - kActive; };
    auto deviating = [&](const ScenarioDispatch& d) { return d.U[gen] > kActive || d.V[gen] > kActive; };
    p.binding_changed = binding_set(inst, a, p.scenario, gen) != binding_set(inst, b, p.scenario, gen);
    if (!interior(a) || !interior(b))
      p.reason = "dispatch not strictly interior";
    else if (!deviating(a) || !deviating(b))
      p.reason = "unit not deviating from its pre-commitment";
    else if (p.binding_changed)
      p.reason = "binding set changed; step too large";
    else
      p.applicable = true;
    out.push_back(std::move(p));
  }
  return out;
}

double committed_total(const MarketInstance& inst, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const auto& g = inst.generators[i];
    if (g.inflexible || g.ramp_up + g.ramp_down > 0.0) s += x[i];
  }
  return s;
}

}  // namespace rasdm
