#include "rasdm/random_instance.hpp"

#include "rasdm/dispatch.hpp"
#include "rasdm/error.hpp"

namespace rasdm {

RiskSpec random_risk_spec(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> level(1, 9), count(1, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RiskSpec s;
  s.spectrum.clear();
  const int k = count(rng);
  double tot = 0.0;
  for (int j = 0; j < k; ++j) {
    s.spectrum.push_back({level(rng) / 10.0, 0.2 + u(rng)});
    tot += s.spectrum.back().weight;
  }
  for (auto& p : s.spectrum) p.weight /= tot;
  s.kappa = u(rng) / s.beta_bar();
  return s;
}

namespace {

MarketInstance draw(std::mt19937_64& rng, const RandomInstanceOptions& opt) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  MarketInstance inst;
  auto& net = inst.network;
  const int nn = pick(1, opt.max_nodes);
  for (int k = 0; k < nn; ++k) net.nodes.push_back("n" + std::to_string(k));
  net.voll = 1000.0;
  // spanning tree plus an optional chord
  for (int k = 1; k < nn; ++k)
    net.lines.push_back({pick(0, k - 1), k, static_cast<double>(pick(1, 4)),
                         static_cast<double>(pick(static_cast<int>(opt.line_capacity_min), 150))});
  if (nn >= 3 && pick(0, 1)) {
    const int a = pick(0, nn - 1);
    const int b = (a + 1 + pick(0, nn - 2)) % nn;
    net.lines.push_back({a, b, static_cast<double>(pick(1, 4)), static_cast<double>(pick(40, 150))});
  }

  const int ns = pick(2, opt.max_scenarios);
  std::vector<int> weight(ns);
  int tot = 0;
  for (auto& v : weight) tot += (v = pick(1, 5));
  for (int w = 0; w < ns; ++w) {
    Scenario sc;
    sc.id = "s" + std::to_string(w);
    sc.prob.exact = Rational(weight[w], tot);
    sc.prob.value = static_cast<double>(weight[w]) / tot;
    sc.demand.assign(nn, 0.0);
    for (int k = 0; k < nn; ++k)
      if (k == 0 || pick(0, 2) == 0) sc.demand[k] = 5.0 * pick(0, 12);
    inst.scenarios.push_back(std::move(sc));
  }

  const int ng = pick(1, opt.max_generators);
  for (int i = 0; i < ng; ++i) {
    Generator g;
    g.id = "g" + std::to_string(i);
    g.node = pick(0, nn - 1);
    g.cost = pick(5, 50);
    g.ramp_up = pick(1, 20);
    g.ramp_down = pick(1, 20);
    const int base = 10 * pick(3, 10);
    for (int w = 0; w < ns; ++w) g.capacity.push_back(pick(0, 3) == 0 ? base / 2 : base);
    inst.generators.push_back(std::move(g));
  }

  if (opt.with_risk || opt.risk_neutral) {
    inst.has_risk_block = true;
    for (const auto& g : inst.generators)
      inst.risk[g.id] = opt.risk_neutral ? RiskSpec::neutral() : random_risk_spec(rng);
    inst.risk["iso"] = opt.risk_neutral ? RiskSpec::neutral() : random_risk_spec(rng);
  }
  return inst;
}

}  // namespace

MarketInstance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& opt) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto inst = draw(rng, opt);
    if (!validate_instance(inst).empty()) continue;
    try {
      check_scenarios_feasible(inst);
    } catch (const Error&) {
      continue;
    }
    return inst;
  }
  fail(ErrorKind::Invalid, "random_instance: could not draw a feasible instance");
}

}  // namespace rasdm
