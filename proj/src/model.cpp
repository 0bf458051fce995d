#include "rasdm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rasdm/error.hpp"

namespace rasdm {

int Network::node_index(const std::string& id) const {
  auto it = std::find(nodes.begin(), nodes.end(), id);
  return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

std::vector<double> MarketInstance::probabilities() const {
  std::vector<double> p;
  for (const auto& s : scenarios) p.push_back(s.prob.value);
  return p;
}

int MarketInstance::generator_index(const std::string& id) const {
  for (std::size_t i = 0; i < generators.size(); ++i)
    if (generators[i].id == id) return static_cast<int>(i);
  return -1;
}

int MarketInstance::scenario_index(const std::string& id) const {
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    if (scenarios[i].id == id) return static_cast<int>(i);
  return -1;
}

double MarketInstance::max_capacity(int gen) const {
  const auto& g = generators.at(gen).capacity;
  return g.empty() ? 0.0 : *std::max_element(g.begin(), g.end());
}

namespace {

bool connected(const Network& net) {
  const std::size_t n = net.nodes.size();
  if (n <= 1) return true;
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& l : net.lines)
    if (l.from >= 0 && l.to >= 0 && l.from < static_cast<int>(n) && l.to < static_cast<int>(n))
      parent[find(l.from)] = find(l.to);
  const int root = find(0);
  for (std::size_t v = 1; v < n; ++v)
    if (find(static_cast<int>(v)) != root) return false;
  return true;
}

}  // namespace

std::vector<Violation> validate_instance(const MarketInstance& inst) {
  std::vector<Violation> out;
  auto add = [&](const char* code, std::string msg) { out.push_back({code, std::move(msg)}); };
  const auto& net = inst.network;
  const int n = static_cast<int>(net.nodes.size());

  if (net.nodes.empty()) add("no_nodes", "network has no nodes");
  if (std::set<std::string>(net.nodes.begin(), net.nodes.end()).size() != net.nodes.size())
    add("duplicate_node", "duplicate node id");
  if (!(net.voll > 0.0) || !std::isfinite(net.voll)) add("bad_voll", "VOLL must be positive");
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    const auto& ln = net.lines[l];
    const std::string tag = "line " + std::to_string(l);
    if (ln.from < 0 || ln.from >= n || ln.to < 0 || ln.to >= n) add("bad_line_endpoint", tag + ": unknown node");
    else if (ln.from == ln.to) add("bad_line_endpoint", tag + ": self loop");
    if (!(ln.capacity > 0.0)) add("bad_line_capacity", tag + ": capacity must be positive");
    if (!(ln.susceptance > 0.0) || !std::isfinite(ln.susceptance))
      add("bad_susceptance", tag + ": susceptance must be positive");
  }
  if (!connected(net)) add("disconnected", "network graph is not connected");

  const std::size_t ns = inst.scenarios.size();
  std::set<std::string> gen_ids;
  bool any_inflexible = false;
  for (const auto& g : inst.generators) {
    if (!gen_ids.insert(g.id).second) add("duplicate_generator", "duplicate generator id " + g.id);
    if (g.node < 0 || g.node >= n) add("bad_generator_node", g.id + ": unknown node");
    if (!(g.cost >= 0.0) || !std::isfinite(g.cost)) add("bad_cost", g.id + ": marginal cost must be >= 0");
    if (!(g.ramp_up >= 0.0) || !(g.ramp_down >= 0.0) || !std::isfinite(g.ramp_up) || !std::isfinite(g.ramp_down))
      add("bad_deviation_cost", g.id + ": deviation costs must be >= 0");
    if (g.inflexible || g.ramp_up + g.ramp_down > 0.0) any_inflexible = true;
    if (g.capacity.size() != ns) add("bad_capacity", g.id + ": capacity not given for every scenario");
    for (double c : g.capacity)
      if (!(c >= 0.0) || !std::isfinite(c)) add("bad_capacity", g.id + ": capacity must be >= 0");
  }
  if (!inst.generators.empty() && !any_inflexible)
    add("no_inflexible_generator", "no inflexible generator (some generator needs r_u + r_v > 0)");
  if (inst.generators.empty()) add("no_generators", "instance has no generators");

  if (inst.scenarios.empty()) add("no_scenarios", "instance has no scenarios");
  std::set<std::string> sc_ids;
  bool all_exact = true;
  Rational exact_sum(0);
  double sum = 0.0;
  for (const auto& s : inst.scenarios) {
    if (!sc_ids.insert(s.id).second) add("duplicate_scenario", "duplicate scenario id " + s.id);
    if (!(s.prob.value > 0.0)) add("bad_probability", s.id + ": probability must be positive");
    sum += s.prob.value;
    if (s.prob.exact)
      exact_sum += *s.prob.exact;
    else
      all_exact = false;
    if (s.demand.size() != net.nodes.size()) add("bad_demand", s.id + ": demand vector has wrong length");
    for (double d : s.demand)
      if (!(d >= 0.0) || !std::isfinite(d)) add("bad_demand", s.id + ": demand must be >= 0");
  }
  if (!inst.scenarios.empty()) {
    const bool ok = all_exact ? exact_sum == Rational(1) : std::abs(sum - 1.0) <= 1e-12;
    if (!ok) add("probabilities_not_normalized", "probabilities not normalized");
  }

  for (const auto& [agent, risk] : inst.risk) {
    if (agent != "iso" && agent != "default" && !gen_ids.count(agent))
      add("unknown_risk_agent", "risk entry for unknown agent " + agent);
    try {
      check_risk(risk, ns);
    } catch (const Error& e) {
      add("bad_risk", agent + ": " + e.what());
    }
  }
  return out;
}

void require_valid(const MarketInstance& inst) {
  const auto v = validate_instance(inst);
  if (v.empty()) return;
  std::string msg = "invalid instance:";
  for (const auto& x : v) msg += " " + x.message + ";";
  fail(ErrorKind::Invalid, msg);
}

double EmpiricalDistribution::cdf(double x) const {
  double f = 0.0;
  for (std::size_t k = 0; k < support.size() && support[k] <= x; ++k) f += probs[k];
  return f;
}

EmpiricalDistribution make_distribution(const std::vector<double>& values, const std::vector<double>& probs,
                                        double merge_tol) {
  if (values.size() != probs.size() || values.empty())
    fail(ErrorKind::Invalid, "distribution: values and probabilities must be non-empty and aligned");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  EmpiricalDistribution d;
  for (std::size_t k : idx) {
    if (!d.support.empty() && values[k] - d.support.back() <= merge_tol) {
      d.probs.back() += probs[k];
    } else {
      d.support.push_back(values[k]);
      d.probs.push_back(probs[k]);
    }
  }
  return d;
}

double pseudoinverse_cdf(const EmpiricalDistribution& dist, double p) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::Invalid, "pseudoinverse_cdf: p must lie in [0,1]");
  if (dist.support.empty()) fail(ErrorKind::Invalid, "pseudoinverse_cdf: empty distribution");
  double f = 0.0;
  for (std::size_t k = 0; k < dist.support.size(); ++k) {
    f += dist.probs[k];
    if (f >= p - 1e-12) return dist.support[k];
  }
  return dist.support.back();
}

}  // namespace rasdm
