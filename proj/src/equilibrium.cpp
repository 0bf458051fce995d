#include "rasdm/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rasdm/error.hpp"
#include "rasdm/lp.hpp"
#include "rasdm/network.hpp"

namespace rasdm {

namespace {

using Terms = std::vector<std::pair<int, double>>;

double clean(double v) { return std::abs(v) < 1e-11 ? 0.0 : v; }

void check_gen(const MarketInstance& inst, int gen) {
  if (gen < 0 || gen >= static_cast<int>(inst.generators.size())) fail(ErrorKind::Invalid, "unknown generator");
}

// theta >= rho of the cost vector whose scenario-w value is `cost[w]` (linear in columns)
void add_risk_rows(lp::LinearProgram& prog, int theta, const std::vector<Terms>& cost, std::span<const double> probs,
                   const AgentRisk& risk) {
  const std::size_t ns = probs.size();
  if (const auto* set = std::get_if<PolyhedralRiskSet>(&risk)) {
    for (const auto& mu : set->points) {
      const int r = prog.add_row(lp::Sense::GreaterEqual, 0.0);
      prog.add_entry(r, theta, 1.0);
      for (std::size_t w = 0; w < ns; ++w)
        for (auto [c, v] : cost[w]) prog.add_entry(r, c, -mu[w] * v);
    }
    return;
  }
  const auto& spec = std::get<RiskSpec>(risk);
  // theta >= (1 - kappa beta_bar) E[C] + kappa sum_j w_j min_t {beta_j t + E[(C - t)+]}
  const int r = prog.add_row(lp::Sense::GreaterEqual, 0.0);
  prog.add_entry(r, theta, 1.0);
  double mean_weight = 1.0 - spec.kappa * spec.beta_bar();
  for (const auto& sp : spec.spectrum) {
    const double k = spec.kappa * sp.weight;
    if (k == 0.0) continue;
    if (sp.beta >= 1.0) {
      mean_weight += k;
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
      for (auto [c, v] : cost[w]) prog.add_entry(row, c, -v);
    }
  }
  if (mean_weight != 0.0)
    for (std::size_t w = 0; w < ns; ++w)
      for (auto [c, v] : cost[w]) prog.add_entry(r, c, -mean_weight * probs[w] * v);
}

// second pass keeping the objective within tolerance of its optimum
lp::LpSolution tie_break(lp::LinearProgram& prog, const lp::LpSolution& first, int objective_col,
                         const std::vector<std::pair<int, double>>& secondary) {
  const double cap = first.objective + 1e-9 * (1.0 + std::abs(first.objective));
  prog.upper[objective_col] = cap;
  std::fill(prog.cost.begin(), prog.cost.end(), 0.0);
  for (auto [c, v] : secondary) prog.cost[c] = v;
  auto sol = lp::solve(prog);
  return sol.optimal() ? sol : first;
}

struct IsoLp {
  lp::LinearProgram prog;
  std::vector<int> F, mag;
  int value_col = -1;
};

IsoLp build_iso(const MarketInstance& inst, std::span<const double> lambda) {
  IsoLp m;
  const auto& net = inst.network;
  const std::size_t nn = net.nodes.size();
  if (lambda.size() != nn) fail(ErrorKind::Invalid, "prices must have one entry per node");
  std::vector<char> slack(nn, 0);
  for (int s : slack_nodes(net)) slack[s] = 1;
  std::vector<int> angle;
  for (std::size_t k = 0; k < nn; ++k) {
    const double lim = slack[k] ? 0.0 : lp::kInf;
    angle.push_back(m.prog.add_column(0.0, -lim, lim));
  }
  // value column v = -sum_n lambda_n tau_n(F), minimised
  m.value_col = m.prog.add_column(1.0, -lp::kInf, lp::kInf);
  const int vr = m.prog.add_row(lp::Sense::Equal, 0.0);
  m.prog.add_entry(vr, m.value_col, 1.0);
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const auto& ln = net.lines[l];
    const int f = m.prog.add_column(0.0, -ln.capacity, ln.capacity);
    m.F.push_back(f);
    const int r = m.prog.add_row(lp::Sense::Equal, 0.0);
    m.prog.add_entry(r, f, 1.0);
    m.prog.add_entry(r, angle[ln.from], -ln.susceptance);
    m.prog.add_entry(r, angle[ln.to], ln.susceptance);
    const double gain = lambda[ln.to] - lambda[ln.from];
    if (gain != 0.0) m.prog.add_entry(vr, f, gain);
    const int a = m.prog.add_column(0.0, 0.0, lp::kInf);
    m.mag.push_back(a);
    const int up = m.prog.add_row(lp::Sense::GreaterEqual, 0.0);
    m.prog.add_entry(up, a, 1.0);
    m.prog.add_entry(up, f, -1.0);
    const int dn = m.prog.add_row(lp::Sense::GreaterEqual, 0.0);
    m.prog.add_entry(dn, a, 1.0);
    m.prog.add_entry(dn, f, 1.0);
  }
  return m;
}

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// optimal ISO value, +inf when an uncapped line joins nodes with different prices
double iso_best_value(const MarketInstance& inst, std::span<const double> lambda, std::vector<double>* flow) {
  auto m = build_iso(inst, lambda);
  auto sol = lp::solve(m.prog);
  if (sol.status == lp::Status::Unbounded) return kUnbounded;
  if (!sol.optimal()) fail(ErrorKind::Numerical, std::string("ISO response LP: ") + lp::to_string(sol.status));
  const double value = -sol.objective;
  if (flow) {
    Terms mag;
    for (int a : m.mag) mag.push_back({a, 1.0});
    sol = tie_break(m.prog, sol, m.value_col, mag);
    flow->clear();
    for (int f : m.F) flow->push_back(clean(sol.x[f]));
  }
  return value;
}

double mean(std::span<const double> v, std::span<const double> p) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += p[k] * v[k];
  return s;
}

// expected MC and ISO values at the candidate; best values alongside
struct SystemGaps {
  double iso_best = 0.0, iso_cand = 0.0, mc_best = 0.0, mc_cand = 0.0;
};

SystemGaps system_gaps(const MarketInstance& inst, const EquilibriumCandidate& c) {
  SystemGaps g;
  const auto p = inst.probabilities();
  const double voll = inst.network.voll;
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
    const auto& lam = c.prices.lambda[w];
    g.iso_best += p[w] * iso_best_value(inst, lam, nullptr);
    g.iso_cand += p[w] * iso_value(inst, lam, c.flows[w]);
    std::vector<double> X;
    for (const auto& s : c.generators) X.push_back(s.X[w]);
    const auto ex = excess_supply(inst, static_cast<int>(w), X, c.flows[w]);
    // market clearing maximises sum_n lambda_n (demand - supply) over [0, VOLL]
    for (std::size_t n = 0; n < ex.size(); ++n) {
      g.mc_best += p[w] * voll * std::max(0.0, -ex[n]);
      g.mc_cand += p[w] * lam[n] * -ex[n];
    }
  }
  return g;
}

bool same_unit(const Generator& a, const Generator& b) {
  return a.node == b.node && a.cost == b.cost && a.ramp_up == b.ramp_up && a.ramp_down == b.ramp_down &&
         a.inflexible == b.inflexible && a.capacity == b.capacity;
}

// Identical units with identical risk get the group mean.  The dispatch LP is
// indifferent between them, and the mean of permuted optima is still optimal,
// but only the even split gives them a common worst-case measure.
void split_evenly(const MarketInstance& inst, const std::vector<AgentRisk>& risks, DispatchSolution& sol) {
  const std::size_t ng = inst.generators.size();
  std::vector<char> done(ng, 0);
  for (std::size_t i = 0; i < ng; ++i) {
    if (done[i]) continue;
    std::vector<std::size_t> group{i};
    for (std::size_t j = i + 1; j < ng; ++j)
      if (!done[j] && same_unit(inst.generators[i], inst.generators[j]) && risks[i] == risks[j]) group.push_back(j);
    for (std::size_t j : group) done[j] = 1;
    if (group.size() < 2) continue;
    const double n = static_cast<double>(group.size());
    auto even = [&](auto get) {
      double s = 0.0;
      for (std::size_t j : group) s += get(j);
      for (std::size_t j : group) get(j) = s / n;
    };
    even([&](std::size_t j) -> double& { return sol.x[j]; });
    for (auto& d : sol.scenarios) {
      even([&](std::size_t j) -> double& { return d.X[j]; });
      even([&](std::size_t j) -> double& { return d.U[j]; });
      even([&](std::size_t j) -> double& { return d.V[j]; });
      even([&](std::size_t j) -> double& { return d.rho[j]; });
    }
  }
}

}  // namespace

PriceField PriceField::from_dispatch(const DispatchSolution& sol) {
  PriceField f;
  for (const auto& d : sol.scenarios) f.lambda.push_back(d.lambda);
  return f;
}

void PriceField::check(const MarketInstance& inst) const {
  if (lambda.size() != inst.scenarios.size()) fail(ErrorKind::Invalid, "price field must cover every scenario");
  const double voll = inst.network.voll;
  for (const auto& row : lambda) {
    if (row.size() != inst.network.nodes.size()) fail(ErrorKind::Invalid, "price field must cover every node");
    for (double v : row)
      if (!(v >= -1e-9 && (voll <= 0.0 || v <= voll + 1e-9)))
        fail(ErrorKind::Invalid, "prices must lie in [0, VOLL]");
  }
}

std::vector<AgentRisk> generator_risks(const MarketInstance& inst) {
  std::vector<AgentRisk> out;
  const auto all = agent_risks(inst);
  // the ISO entry comes last
  for (std::size_t i = 0; i < inst.generators.size(); ++i) out.push_back(all[i].risk);
  return out;
}

std::vector<double> strategy_profit(const MarketInstance& inst, const PriceField& prices, int gen,
                                    const GeneratorStrategy& s) {
  check_gen(inst, gen);
  const auto& g = inst.generators[gen];
  std::vector<double> z;
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w)
    z.push_back((prices.lambda[w][g.node] - g.cost) * s.X[w] - g.ramp_up * s.U[w] - g.ramp_down * s.V[w]);
  return z;
}

double strategy_value(const MarketInstance& inst, const PriceField& prices, int gen, const GeneratorStrategy& s,
                      const AgentRisk& risk) {
  return -disutility(strategy_profit(inst, prices, gen, s), inst.probabilities(), risk);
}

BestResponse best_response_generator(const MarketInstance& inst, const PriceField& prices, int gen,
                                     const AgentRisk& risk, const ResponseLimits& limits) {
  check_gen(inst, gen);
  prices.check(inst);
  const std::size_t ns = inst.scenarios.size();
  check_risk(risk, ns);
  if (!limits.dispatch.empty() && limits.dispatch.size() != ns)
    fail(ErrorKind::Invalid, "fixed dispatch must have one entry per scenario");
  if (limits.x && !(*limits.x >= 0.0)) fail(ErrorKind::Invalid, "pre-commitment must be >= 0");
  const auto& g = inst.generators[gen];
  const auto probs = inst.probabilities();

  lp::LinearProgram prog;
  const double xmax = limits.x ? *limits.x : inst.max_capacity(gen);
  const int xc = prog.add_column(0.0, limits.x ? *limits.x : 0.0, xmax, "x");
  std::vector<int> Xc, Uc, Vc;
  std::vector<Terms> cost(ns);
  const double dev = g.inflexible ? 0.0 : lp::kInf;
  for (std::size_t w = 0; w < ns; ++w) {
    const double lo = limits.dispatch.empty() ? 0.0 : limits.dispatch[w];
    const double hi = limits.dispatch.empty() ? g.capacity[w] : limits.dispatch[w];
    Xc.push_back(prog.add_column(0.0, lo, hi));
    Uc.push_back(prog.add_column(0.0, 0.0, dev));
    Vc.push_back(prog.add_column(0.0, 0.0, dev));
    const int r = prog.add_row(lp::Sense::Equal, 0.0);
    prog.add_entry(r, Xc[w], 1.0);
    prog.add_entry(r, Uc[w], -1.0);
    prog.add_entry(r, Vc[w], 1.0);
    prog.add_entry(r, xc, -1.0);
    const double margin = g.cost - prices.lambda[w][g.node];
    if (margin != 0.0) cost[w].push_back({Xc[w], margin});
    if (g.ramp_up != 0.0) cost[w].push_back({Uc[w], g.ramp_up});
    if (g.ramp_down != 0.0) cost[w].push_back({Vc[w], g.ramp_down});
  }
  const int theta = prog.add_column(1.0, -lp::kInf, lp::kInf, "theta");
  add_risk_rows(prog, theta, cost, probs, risk);

  auto sol = lp::solve(prog);
  if (sol.status == lp::Status::Infeasible)
    fail(ErrorKind::Infeasible, "generator " + g.id + " cannot settle the fixed dispatch");
  if (!sol.optimal()) fail(ErrorKind::Numerical, std::string("best-response LP: ") + lp::to_string(sol.status));
  const double rho = sol.objective;
  const auto first = sol;
  const auto objective = prog.cost;
  sol = tie_break(prog, sol, theta, {{xc, 1.0}});

  // the capped objective lets x slide by the solver tolerance; snap it onto a
  // nearby breakpoint when that is just as good
  const double xt = sol.x[xc];
  double snap = xt, best = 1e-6 * (1.0 + std::abs(xt));
  std::vector<double> marks{prog.lower[xc], xmax, first.x[xc]};
  for (std::size_t w = 0; w < ns; ++w) {
    marks.push_back(first.x[Xc[w]]);
    marks.push_back(sol.x[Xc[w]]);
  }
  for (double m : marks)
    if (m != xt && m >= prog.lower[xc] && m <= xmax && std::abs(m - xt) <= best) {
      best = std::abs(m - xt);
      snap = m;
    }
  if (snap != xt) {
    prog.cost = objective;
    prog.upper[theta] = lp::kInf;
    prog.lower[xc] = prog.upper[xc] = snap;
    const auto pinned = lp::solve(prog);
    if (pinned.optimal() && pinned.objective <= rho + 1e-9 * (1.0 + std::abs(rho))) sol = pinned;
  }

  BestResponse br;
  br.value = clean(-rho);
  // snap solver noise back onto the bounds
  auto in = [&](int c) { return clean(std::clamp(sol.x[c], prog.lower[c], prog.upper[c])); };
  br.strategy.x = in(xc);
  for (std::size_t w = 0; w < ns; ++w) {
    double u = std::max(0.0, sol.x[Uc[w]]), v = std::max(0.0, sol.x[Vc[w]]);
    const double both = std::min(u, v);
    br.strategy.X.push_back(in(Xc[w]));
    br.strategy.U.push_back(clean(u - both));
    br.strategy.V.push_back(clean(v - both));
  }
  return br;
}

std::vector<double> best_response_iso(const MarketInstance& inst, std::span<const double> lambda) {
  std::vector<double> flow;
  if (std::isinf(iso_best_value(inst, lambda, &flow)))
    fail(ErrorKind::Invalid, "ISO response unbounded: an uncapped line joins nodes with different prices");
  return flow;
}

double iso_value(const MarketInstance& inst, std::span<const double> lambda, std::span<const double> flow) {
  const auto tau = net_inflow(inst.network, flow);
  return mean(tau, lambda);
}

std::vector<double> excess_supply(const MarketInstance& inst, int scenario, std::span<const double> X,
                                  std::span<const double> flow) {
  auto ex = net_inflow(inst.network, flow);
  for (std::size_t i = 0; i < inst.generators.size(); ++i) ex[inst.generators[i].node] += X[i];
  const auto& d = inst.scenarios.at(scenario).demand;
  for (std::size_t n = 0; n < ex.size(); ++n) ex[n] = clean(ex[n] - d[n]);
  return ex;
}

std::vector<double> best_response_market_clearing(std::span<const double> excess, std::span<const double> lambda,
                                                  double voll, double tol) {
  if (excess.size() != lambda.size()) fail(ErrorKind::Invalid, "excess and prices must cover the same nodes");
  std::vector<double> out(lambda.begin(), lambda.end());
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (excess[n] < -tol) out[n] = voll;
    else if (excess[n] > tol) out[n] = 0.0;
  }
  return out;
}

EquilibriumCandidate candidate_from_dispatch(const MarketInstance& inst, const DispatchSolution& sol) {
  EquilibriumCandidate c;
  c.prices = PriceField::from_dispatch(sol);
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    GeneratorStrategy s;
    s.x = sol.x[i];
    for (const auto& d : sol.scenarios) {
      s.X.push_back(d.X[i]);
      s.U.push_back(d.U[i]);
      s.V.push_back(d.V[i]);
    }
    c.generators.push_back(std::move(s));
  }
  for (const auto& d : sol.scenarios) c.flows.push_back(d.flow);
  return c;
}

GapReport verify_equilibrium(const MarketInstance& inst, const EquilibriumCandidate& cand,
                             const std::vector<AgentRisk>& risks, double tol) {
  GapReport rep;
  if (inst.generators.empty() && inst.scenarios.empty()) return rep;
  cand.prices.check(inst);
  if (risks.size() != inst.generators.size() || cand.generators.size() != inst.generators.size())
    fail(ErrorKind::Invalid, "candidate and risks need one entry per generator");
  if (cand.flows.size() != inst.scenarios.size()) fail(ErrorKind::Invalid, "candidate flows must cover every scenario");
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const int gen = static_cast<int>(i);
    AgentGap a;
    a.agent = inst.generators[i].id;
    a.best_value = best_response_generator(inst, cand.prices, gen, risks[i]).value;
    a.candidate_value = strategy_value(inst, cand.prices, gen, cand.generators[i], risks[i]);
    a.gap = std::max(0.0, a.best_value - a.candidate_value);
    rep.agents.push_back(a);
  }
  const auto sg = system_gaps(inst, cand);
  rep.agents.push_back({"iso", sg.iso_best, sg.iso_cand, std::max(0.0, sg.iso_best - sg.iso_cand)});
  rep.agents.push_back({"market_clearing", sg.mc_best, sg.mc_cand, std::max(0.0, sg.mc_best - sg.mc_cand)});
  for (const auto& a : rep.agents) rep.max_gap = std::max(rep.max_gap, a.gap);
  rep.equilibrium = rep.max_gap <= tol;
  return rep;
}

FixedPointResult iterate_fixed_point(const MarketInstance& inst, const std::vector<AgentRisk>& risks,
                                     const FixedPointOptions& opt) {
  require_valid(inst);
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) fail(ErrorKind::Invalid, "damping must lie in (0, 1]");
  const std::size_t ng = inst.generators.size(), ns = inst.scenarios.size();
  const auto probs = inst.probabilities();
  FixedPointResult out;
  out.best.max_gap = kUnbounded;
  std::vector<double> nu = probs;

  for (int it = 0; it < std::max(1, opt.max_iters); ++it) {
    DispatchOptions dopt;
    dopt.weights = nu;
    auto sol = solve_slp(inst, dopt);
    split_evenly(inst, risks, sol);
    auto cand = candidate_from_dispatch(inst, sol);
    const auto rep = verify_equilibrium(inst, cand, risks, opt.tol);
    for (const auto& a : rep.agents) cand.gaps.push_back(a.gap);
    cand.max_gap = rep.max_gap;

    // mean worst-case measure of the generators' profits under these prices
    std::vector<double> target(ns, 0.0);
    for (std::size_t i = 0; i < ng; ++i) {
      auto z = strategy_profit(inst, cand.prices, static_cast<int>(i), cand.generators[i]);
      for (double& v : z) v = -v;
      const auto mu = separating_measure(z, probs, risks[i]);
      for (std::size_t w = 0; w < ns; ++w) target[w] += mu[w] / static_cast<double>(ng);
    }
    if (ng == 0) target = probs;
    double step = 0.0;
    for (std::size_t w = 0; w < ns; ++w) step += std::abs(target[w] - nu[w]);

    IterationRecord rec{it, nu, sol.x, cand.prices, cand.gaps, cand.max_gap, step};
    out.trace.push_back(std::move(rec));
    out.iterations = it + 1;

    if (rep.equilibrium) {
      const bool seen = std::any_of(out.equilibria.begin(), out.equilibria.end(), [&](const EquilibriumCandidate& e) {
        for (std::size_t i = 0; i < ng; ++i)
          if (std::abs(e.generators[i].x - cand.generators[i].x) > 1e-7) return false;
        return true;
      });
      if (!seen) out.equilibria.push_back(cand);
    }
    if (cand.max_gap < out.best.max_gap) out.best = cand;
    if (rep.equilibrium) {
      out.converged = true;
      break;
    }
    for (std::size_t w = 0; w < ns; ++w) nu[w] = (1.0 - opt.damping) * nu[w] + opt.damping * target[w];
  }
  return out;
}

}  // namespace rasdm
