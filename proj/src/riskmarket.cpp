#include "rasdm/riskmarket.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

#include "rasdm/error.hpp"
#include "rasdm/network.hpp"

namespace rasdm {

std::vector<AgentRiskEntry> agent_risks(const MarketInstance& inst) {
  std::vector<AgentRiskEntry> out;
  const auto probs = inst.probabilities();
  for (const auto& g : inst.generators) {
    if (auto it = inst.risk.find(g.id); it != inst.risk.end())
      out.push_back({g.id, it->second, g.id});
    else if (auto d = inst.risk.find("default"); d != inst.risk.end())
      out.push_back({g.id, d->second, "default"});
    else
      out.push_back({g.id, RiskSpec::neutral(), "neutral"});
  }
  if (auto it = inst.risk.find("iso"); it != inst.risk.end()) {
    out.push_back({"iso", it->second, "iso"});
  } else {
    std::size_t least = 0;
    for (std::size_t i = 1; i < out.size(); ++i)
      if (risk_radius(out[i].risk, probs) < risk_radius(out[least].risk, probs) - 1e-15) least = i;
    out.push_back({"iso", out.empty() ? AgentRisk{RiskSpec::neutral()} : out[least].risk,
                   out.empty() ? "neutral" : "least averse: " + out[least].agent});
  }
  return out;
}

namespace {

struct Agent {
  int theta;
  std::vector<int> W;
  bool iso;
  bool lazy = false;
};

using Terms = std::vector<std::pair<int, double>>;

// Z_a(w): the agent's cost in scenario w minus its security payoff
Terms cost_terms(const Agent& a, int gen, const ScenarioBlock& b, const MarketInstance& inst, int w) {
  Terms t{{a.W[w], -1.0}};
  if (a.iso) return t;
  const auto& g = inst.generators[gen];
  if (g.cost != 0.0) t.push_back({b.X[gen], g.cost});
  if (g.ramp_up != 0.0) t.push_back({b.U[gen], g.ramp_up});
  if (g.ramp_down != 0.0) t.push_back({b.V[gen], g.ramp_down});
  return t;
}

struct Builder {
  lp::LinearProgram& prog;
  const MarketInstance& inst;
  const std::vector<ScenarioBlock>& blocks;

  Terms z(const Agent& a, int gen, int w) const { return cost_terms(a, gen, blocks[w], inst, w); }

  // theta_a >= sum_w mu(w) Z_a(w)
  void cut(const Agent& a, int gen, const std::vector<double>& mu) {
    const int r = prog.add_row(lp::Sense::GreaterEqual, 0.0);
    prog.add_entry(r, a.theta, 1.0);
    for (std::size_t w = 0; w < mu.size(); ++w)
      if (mu[w] != 0.0)
        for (auto [c, v] : z(a, gen, static_cast<int>(w))) prog.add_entry(r, c, -mu[w] * v);
  }

  // theta_a >= (1 - kappa beta_bar) E[Z] + kappa sum_j w_j min_t {beta_j t + E[(Z - t)+]}
  void epigraph(const Agent& a, int gen, const RiskSpec& spec, const std::vector<double>& probs) {
    const std::size_t ns = probs.size();
    const int r = prog.add_row(lp::Sense::GreaterEqual, 0.0);
    prog.add_entry(r, a.theta, 1.0);
    double mean_weight = 1.0 - spec.kappa * spec.beta_bar();
    for (const auto& sp : spec.spectrum) {
      const double k = spec.kappa * sp.weight;
      if (k == 0.0) continue;
      if (sp.beta >= 1.0) {
        mean_weight += k;  // the whole-distribution tail is the mean
        continue;
      }
      const int t = prog.add_column(0.0, -lp::kInf, lp::kInf);
      prog.add_entry(r, t, -k * sp.beta);
      for (std::size_t w = 0; w < ns; ++w) {
        const int e = prog.add_column(0.0, 0.0, lp::kInf);
        prog.add_entry(r, e, -k * probs[w]);
        const int row = prog.add_row(lp::Sense::GreaterEqual, 0.0);
        prog.add_entry(row, e, 1.0);
        prog.add_entry(row, t, 1.0);
        for (auto [c, v] : z(a, gen, static_cast<int>(w))) prog.add_entry(row, c, -v);
      }
    }
    if (mean_weight != 0.0)
      for (std::size_t w = 0; w < ns; ++w)
        for (auto [c, v] : z(a, gen, static_cast<int>(w))) prog.add_entry(r, c, -mean_weight * probs[w] * v);
  }
};

}  // namespace

const char* to_string(RiskRows m) {
  switch (m) {
    case RiskRows::Auto: return "auto";
    case RiskRows::ExtremePoints: return "extreme_points";
    case RiskRows::CuttingPlanes: return "cutting_planes";
    case RiskRows::Epigraph: return "epigraph";
  }
  return "unknown";
}

RiskMarketSolution solve_raslp(const MarketInstance& inst, const std::vector<AgentRiskEntry>& risks,
                               const RaslpOptions& opt) {
  require_valid(inst);
  const std::size_t ng = inst.generators.size(), ns = inst.scenarios.size();
  if (risks.size() != ng + 1) fail(ErrorKind::Invalid, "risk market needs one risk set per generator plus the ISO");
  const auto probs = inst.probabilities();

  std::vector<AgentRisk> sets;
  for (const auto& r : risks) sets.push_back(r.risk);
  if (!common_measure(sets, probs)) fail(ErrorKind::EmptyIntersection, "intersection empty: agents' risk sets share no measure");

  lp::LinearProgram prog;
  std::vector<int> xc;
  for (std::size_t i = 0; i < ng; ++i)
    xc.push_back(prog.add_column(0.0, 0.0, inst.max_capacity(static_cast<int>(i)), "x_" + inst.generators[i].id));
  std::vector<ScenarioBlock> blocks;
  for (std::size_t w = 0; w < ns; ++w) blocks.push_back(add_scenario_block(prog, inst, static_cast<int>(w), 0.0, xc, {}));

  std::vector<Agent> agents(ng + 1);
  for (std::size_t a = 0; a <= ng; ++a) {
    agents[a].iso = a == ng;
    agents[a].theta = prog.add_column(1.0, -lp::kInf, lp::kInf, "theta_" + risks[a].agent);
    for (std::size_t w = 0; w < ns; ++w)
      agents[a].W.push_back(prog.add_column(0.0, -lp::kInf, lp::kInf, "W_" + risks[a].agent + "_" + inst.scenarios[w].id));
  }
  std::vector<int> clearing;
  for (std::size_t w = 0; w < ns; ++w) {
    clearing.push_back(prog.add_row(lp::Sense::Equal, 0.0, "clear_" + inst.scenarios[w].id));
    for (const auto& a : agents) prog.add_entry(clearing.back(), a.W[w], 1.0);
  }

  RiskMarketSolution out;
  Builder build{prog, inst, blocks};
  for (std::size_t a = 0; a <= ng; ++a) {
    auto& ag = agents[a];
    const int gen = static_cast<int>(a);
    if (const auto* set = std::get_if<PolyhedralRiskSet>(&risks[a].risk)) {
      for (const auto& mu : set->points) build.cut(ag, gen, mu);
      out.mode.push_back(to_string(RiskRows::ExtremePoints));
      continue;
    }
    const auto& spec = std::get<RiskSpec>(risks[a].risk);
    RiskRows how = opt.rows;
    std::vector<std::vector<double>> points;
    if (how == RiskRows::Auto || how == RiskRows::ExtremePoints) {
      try {
        points = extreme_points(spec, probs, opt.enumeration_bound).points;
        how = RiskRows::ExtremePoints;
      } catch (const Error&) {
        if (how == RiskRows::ExtremePoints) throw;
        how = RiskRows::Epigraph;
      }
    }
    if (how == RiskRows::ExtremePoints) {
      for (const auto& mu : points) build.cut(ag, gen, mu);
    } else if (how == RiskRows::Epigraph) {
      build.epigraph(ag, gen, spec, probs);
    } else {
      ag.lazy = true;
      // P belongs to every spectral set and keeps the first master bounded
      build.cut(ag, gen, probs);
    }
    out.mode.push_back(to_string(how));
  }

  lp::LpSolution sol;
  for (int round = 0;; ++round) {
    if (const char* dump = std::getenv("RASDM_DUMP_LP")) {
      std::ofstream f(dump);
      lp::write_mps(prog, f, "RASLP");
    }
    // later rounds only append cut rows, so the previous basis is a warm start
    sol = round == 0 ? lp::solve(prog) : lp::solve(prog, sol.basis);
    if (round > 0 && !sol.optimal()) sol = lp::solve(prog);
    if (sol.status == lp::Status::Unbounded)
      fail(ErrorKind::EmptyIntersection, "intersection empty: security book is unbounded");
    if (sol.status == lp::Status::Infeasible) {
      check_scenarios_feasible(inst);
      fail(ErrorKind::Infeasible, "no pre-commitment serves every scenario");
    }
    if (!sol.optimal()) fail(ErrorKind::Numerical, std::string("risk market LP: ") + lp::to_string(sol.status));
    out.cut_rounds = round;
    int added = 0;
    for (std::size_t a = 0; a <= ng; ++a) {
      const auto& ag = agents[a];
      if (!ag.lazy) continue;
      std::vector<double> z(ns, 0.0);
      for (std::size_t w = 0; w < ns; ++w)
        for (auto [c, v] : build.z(ag, static_cast<int>(a), static_cast<int>(w))) z[w] += v * sol.x[c];
      const auto mu = separating_measure(z, probs, risks[a].risk);
      double v = 0.0;
      for (std::size_t w = 0; w < ns; ++w) v += mu[w] * z[w];
      const double th = sol.x[ag.theta];
      if (v - th > opt.cut_tol * (1.0 + std::abs(th))) {
        build.cut(ag, static_cast<int>(a), mu);
        ++added;
      }
    }
    out.cuts_added += added;
    if (added == 0) break;
    if (round + 1 >= opt.max_cut_rounds)
      fail(ErrorKind::NotConverged, "risk market cutting planes did not converge within " +
                                        std::to_string(opt.max_cut_rounds) + " rounds");
  }

  if (opt.resolve_duals) {
    std::vector<int> rows;
    for (const auto& b : blocks) rows.insert(rows.end(), b.balance.begin(), b.balance.end());
    sol = lp::resolve_degenerate_duals(prog, sol, lp::DualPreference::Min, rows);
  }

  for (std::size_t w = 0; w < ns; ++w) out.pi.push_back(-sol.duals[clearing[w]]);
  for (int c : xc) out.dispatch.x.push_back(std::abs(sol.x[c]) < 1e-11 ? 0.0 : sol.x[c]);
  for (std::size_t w = 0; w < ns; ++w) {
    const double scale = out.pi[w] > 1e-12 ? out.pi[w] : 0.0;
    out.dispatch.scenarios.push_back(read_block(inst, blocks[w], sol, scale));
    out.dispatch.objective += probs[w] * out.dispatch.scenarios.back().cost;
  }
  out.dispatch.duals_resolved = opt.resolve_duals;
  for (std::size_t a = 0; a <= ng; ++a) {
    out.agents.push_back(risks[a].agent);
    out.theta.push_back(sol.x[agents[a].theta]);
    std::vector<double> wv;
    for (int c : agents[a].W) wv.push_back(std::abs(sol.x[c]) < 1e-11 ? 0.0 : sol.x[c]);
    out.W.push_back(std::move(wv));
  }
  out.objective = sol.objective;
  out.pi = extract_risk_adjusted_measure(inst, risks, out);
  for (const auto& r : risks) out.membership.push_back(membership_residual(out.pi, probs, r.risk));
  return out;
}

RiskMarketSolution solve_raslp(const MarketInstance& inst, const RaslpOptions& opt) {
  return solve_raslp(inst, agent_risks(inst), opt);
}

std::vector<double> extract_risk_adjusted_measure(const MarketInstance& inst, const std::vector<AgentRiskEntry>& risks,
                                                  const RiskMarketSolution& sol) {
  const auto probs = inst.probabilities();
  std::vector<double> pi = sol.pi;
  double s = 0.0;
  for (double& v : pi) {
    if (v < 0.0 && v > -1e-10) v = 0.0;
    s += v;
  }
  if (std::abs(s - 1.0) > 1e-8) fail(ErrorKind::Numerical, "security prices do not sum to one");
  for (double v : pi)
    if (v < 0.0) fail(ErrorKind::Numerical, "negative security price");
  for (const auto& r : risks)
    if (membership_residual(pi, probs, r.risk) > 1e-7)
      fail(ErrorKind::Numerical, "security prices fall outside the risk set of " + r.agent);
  return pi;
}

double security_settlement(const RiskMarketSolution& sol, int agent, int scenario) {
  const auto& w = sol.W.at(agent);
  double mean = 0.0;
  for (std::size_t v = 0; v < w.size(); ++v) mean += sol.pi[v] * w[v];
  return w.at(scenario) - mean;
}

double risk_adjusted_system_objective(const MarketInstance& inst, const DispatchSolution& policy, const AgentRisk& risk) {
  std::vector<double> profit;
  for (const auto& d : policy.scenarios) profit.push_back(-d.cost);
  return disutility(profit, inst.probabilities(), risk);
}

}  // namespace rasdm
