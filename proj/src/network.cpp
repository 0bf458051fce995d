#include "rasdm/network.hpp"

#include <numeric>

namespace rasdm {

std::vector<int> slack_nodes(const Network& net) {
  const int n = static_cast<int>(net.nodes.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& l : net.lines) {
    const int a = find(l.from), b = find(l.to);
    // keep the smallest index as root so the slack is the first node of each component
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> out;
  for (int v = 0; v < n; ++v)
    if (find(v) == v) out.push_back(v);
  return out;
}

std::vector<double> net_inflow(const Network& net, std::span<const double> flows) {
  std::vector<double> tau(net.nodes.size(), 0.0);
  for (std::size_t l = 0; l < net.lines.size(); ++l) {
    tau[net.lines[l].to] += flows[l];
    tau[net.lines[l].from] -= flows[l];
  }
  return tau;
}

ScenarioBlock add_scenario_block(lp::LinearProgram& prog, const MarketInstance& inst, int w, double weight,
                                 std::span<const int> xcols, std::span<const double> xfixed) {
  const auto& net = inst.network;
  const std::size_t ng = inst.generators.size(), nn = net.nodes.size(), nl = net.lines.size();
  const std::string tag = "_" + inst.scenarios[w].id;
  ScenarioBlock b;
  b.scenario = w;
  b.first_stage = !xcols.empty();

  for (std::size_t i = 0; i < ng; ++i) {
    const auto& g = inst.generators[i];
    const double dev = g.inflexible ? 0.0 : lp::kInf;
    b.X.push_back(prog.add_column(weight * g.cost, 0.0, g.capacity[w], "X_" + g.id + tag));
    b.U.push_back(prog.add_column(weight * g.ramp_up, 0.0, dev, "U_" + g.id + tag));
    b.V.push_back(prog.add_column(weight * g.ramp_down, 0.0, dev, "V_" + g.id + tag));
  }
  for (std::size_t l = 0; l < nl; ++l) {
    const double cap = net.lines[l].capacity;
    b.F.push_back(prog.add_column(0.0, -cap, cap, "F" + std::to_string(l) + tag));
  }
  std::vector<char> slack(nn, 0);
  for (int s : slack_nodes(net)) slack[s] = 1;
  for (std::size_t k = 0; k < nn; ++k) {
    const double lim = slack[k] ? 0.0 : lp::kInf;
    b.angle.push_back(prog.add_column(0.0, -lim, lim, "theta_" + net.nodes[k] + tag));
  }

  for (std::size_t k = 0; k < nn; ++k)
    b.balance.push_back(prog.add_row(lp::Sense::GreaterEqual, inst.scenarios[w].demand[k], "bal_" + net.nodes[k] + tag));
  for (std::size_t i = 0; i < ng; ++i) prog.add_entry(b.balance[inst.generators[i].node], b.X[i], 1.0);
  for (std::size_t l = 0; l < nl; ++l) {
    const auto& ln = net.lines[l];
    prog.add_entry(b.balance[ln.to], b.F[l], 1.0);
    prog.add_entry(b.balance[ln.from], b.F[l], -1.0);
    const int r = prog.add_row(lp::Sense::Equal, 0.0, "flow" + std::to_string(l) + tag);
    prog.add_entry(r, b.F[l], 1.0);
    prog.add_entry(r, b.angle[ln.from], -ln.susceptance);
    prog.add_entry(r, b.angle[ln.to], ln.susceptance);
    b.flow.push_back(r);
  }

  for (std::size_t i = 0; i < ng; ++i) {
    const std::string name = "link_" + inst.generators[i].id + tag;
    if (b.first_stage) {
      const int r = prog.add_row(lp::Sense::Equal, 0.0, name);
      prog.add_entry(r, xcols[i], 1.0);
      prog.add_entry(r, b.U[i], 1.0);
      prog.add_entry(r, b.V[i], -1.0);
      prog.add_entry(r, b.X[i], -1.0);
      b.link.push_back(r);
    } else {
      const int r = prog.add_row(lp::Sense::Equal, xfixed[i], name);
      prog.add_entry(r, b.X[i], 1.0);
      prog.add_entry(r, b.U[i], -1.0);
      prog.add_entry(r, b.V[i], 1.0);
      b.link.push_back(r);
    }
  }
  return b;
}

std::vector<std::pair<int, double>> block_cost_terms(const MarketInstance& inst, const ScenarioBlock& b) {
  std::vector<std::pair<int, double>> t;
  for (std::size_t i = 0; i < inst.generators.size(); ++i) {
    const auto& g = inst.generators[i];
    if (g.cost != 0.0) t.push_back({b.X[i], g.cost});
    if (g.ramp_up != 0.0) t.push_back({b.U[i], g.ramp_up});
    if (g.ramp_down != 0.0) t.push_back({b.V[i], g.ramp_down});
  }
  return t;
}

}  // namespace rasdm
