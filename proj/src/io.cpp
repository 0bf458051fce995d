#include "rasdm/io.hpp"

#include <fstream>
#include <sstream>

#include "rasdm/error.hpp"
#include "rasdm/lp.hpp"

namespace rasdm {

namespace {

const Json& need(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(ErrorKind::Invalid, where + ": missing \"" + key + "\"");
  return obj.at(key);
}

double number(const Json& v, const std::string& where) {
  if (!v.is_number()) fail(ErrorKind::Invalid, where + ": expected a number");
  return v.get<double>();
}

Probability parse_probability(const Json& v, const std::string& where) {
  Probability p;
  if (v.is_number()) {
    p.value = v.get<double>();
    return p;
  }
  if (!v.is_string()) fail(ErrorKind::Invalid, where + ": probability must be a number or \"num/den\"");
  const std::string s = v.get<std::string>();
  try {
    const auto slash = s.find('/');
    const long long num = std::stoll(s.substr(0, slash));
    const long long den = slash == std::string::npos ? 1 : std::stoll(s.substr(slash + 1));
    if (den <= 0) throw std::invalid_argument("denominator");
    p.exact = Rational(num, den);
    p.value = boost::rational_cast<double>(*p.exact);
  } catch (const std::exception&) {
    fail(ErrorKind::Invalid, where + ": cannot read probability \"" + s + "\"");
  }
  return p;
}

}  // namespace

AgentRisk parse_risk(const Json& doc, std::size_t scenarios) {
  if (!doc.is_object()) fail(ErrorKind::Invalid, "risk entry must be an object");
  AgentRisk out;
  if (doc.contains("extreme_points")) {
    PolyhedralRiskSet set;
    for (const auto& pt : doc.at("extreme_points")) {
      std::vector<double> m;
      for (const auto& v : pt) m.push_back(number(v, "extreme_points"));
      set.points.push_back(std::move(m));
    }
    out = std::move(set);
  } else {
    RiskSpec spec;
    spec.kappa = number(need(doc, "kappa", "risk"), "risk.kappa");
    if (doc.contains("spectrum")) {
      spec.spectrum.clear();
      for (const auto& p : doc.at("spectrum"))
        spec.spectrum.push_back({number(need(p, "beta", "spectrum"), "beta"), number(need(p, "weight", "spectrum"), "weight")});
    } else if (spec.kappa != 0.0) {
      fail(ErrorKind::Invalid, "risk: spectrum required when kappa > 0");
    }
    out = std::move(spec);
  }
  check_risk(out, scenarios);
  return out;
}

Json risk_to_json(const AgentRisk& risk) {
  if (const auto* spec = std::get_if<RiskSpec>(&risk)) {
    Json sp = Json::array();
    for (const auto& p : spec->spectrum) sp.push_back({{"beta", p.beta}, {"weight", p.weight}});
    return {{"kappa", spec->kappa}, {"spectrum", sp}};
  }
  return {{"extreme_points", std::get<PolyhedralRiskSet>(risk).points}};
}

MarketInstance parse_instance(const Json& doc) {
  if (!doc.is_object()) fail(ErrorKind::Invalid, "instance must be a JSON object");
  MarketInstance inst;
  auto& net = inst.network;
  for (const auto& v : need(doc, "nodes", "instance")) {
    if (!v.is_string()) fail(ErrorKind::Invalid, "nodes: ids must be strings");
    net.nodes.push_back(v.get<std::string>());
  }
  net.voll = number(need(doc, "voll", "instance"), "voll");
  if (doc.contains("lines")) {
    for (const auto& l : doc.at("lines")) {
      Line ln{};
      ln.from = net.node_index(need(l, "from", "line").get<std::string>());
      ln.to = net.node_index(need(l, "to", "line").get<std::string>());
      ln.susceptance = number(need(l, "susceptance", "line"), "line.susceptance");
      ln.capacity = l.contains("capacity") && !l.at("capacity").is_null() ? number(l.at("capacity"), "line.capacity")
                                                                          : lp::kInf;
      net.lines.push_back(ln);
    }
  }

  const auto& scen = need(doc, "scenarios", "instance");
  for (const auto& s : scen) {
    Scenario sc;
    sc.id = need(s, "id", "scenario").get<std::string>();
    sc.prob = parse_probability(need(s, "prob", "scenario " + sc.id), "scenario " + sc.id);
    sc.demand.assign(net.nodes.size(), 0.0);
    if (s.contains("demand")) {
      for (const auto& [node, mw] : s.at("demand").items()) {
        const int k = net.node_index(node);
        if (k < 0) fail(ErrorKind::Invalid, "scenario " + sc.id + ": demand at unknown node " + node);
        sc.demand[k] = number(mw, "demand");
      }
    }
    inst.scenarios.push_back(std::move(sc));
  }

  for (const auto& g : need(doc, "generators", "instance")) {
    Generator gen;
    gen.id = need(g, "id", "generator").get<std::string>();
    const std::string where = "generator " + gen.id;
    gen.node = net.node_index(need(g, "node", where).get<std::string>());
    if (gen.node < 0) fail(ErrorKind::Invalid, where + ": unknown node");
    gen.cost = number(need(g, "c", where), where + ".c");
    gen.ramp_up = g.contains("r_u") ? number(g.at("r_u"), where + ".r_u") : 0.0;
    gen.ramp_down = g.contains("r_v") ? number(g.at("r_v"), where + ".r_v") : 0.0;
    gen.inflexible = g.value("inflexible", false);
    const double base = g.contains("capacity") ? number(g.at("capacity"), where + ".capacity") : 0.0;
    if (!g.contains("capacity") && !g.contains("capacity_per_scenario"))
      fail(ErrorKind::Invalid, where + ": needs capacity or capacity_per_scenario");
    gen.capacity.assign(inst.scenarios.size(), base);
    if (g.contains("capacity_per_scenario")) {
      const auto& cps = g.at("capacity_per_scenario");
      if (cps.is_array()) {
        if (cps.size() != inst.scenarios.size()) fail(ErrorKind::Invalid, where + ": capacity_per_scenario length");
        for (std::size_t w = 0; w < cps.size(); ++w) gen.capacity[w] = number(cps[w], where);
      } else {
        for (const auto& [sid, v] : cps.items()) {
          const int w = inst.scenario_index(sid);
          if (w < 0) fail(ErrorKind::Invalid, where + ": capacity for unknown scenario " + sid);
          gen.capacity[w] = number(v, where);
        }
      }
    }
    inst.generators.push_back(std::move(gen));
  }
  for (std::size_t w = 0; w < scen.size(); ++w) {
    if (!scen[w].contains("capacity_overrides")) continue;
    for (const auto& [gid, v] : scen[w].at("capacity_overrides").items()) {
      const int i = inst.generator_index(gid);
      if (i < 0) fail(ErrorKind::Invalid, "scenario " + inst.scenarios[w].id + ": override for unknown generator " + gid);
      inst.generators[i].capacity[w] = number(v, "capacity_overrides");
    }
  }

  if (doc.contains("risk") && !doc.at("risk").is_null()) {
    inst.has_risk_block = true;
    for (const auto& [agent, r] : doc.at("risk").items()) inst.risk[agent] = parse_risk(r, inst.scenarios.size());
  }
  return inst;
}

MarketInstance parse_instance_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Invalid, std::string("parse error: ") + e.what());
  }
  try {
    return parse_instance(doc);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Invalid, std::string("schema error: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Invalid, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EmpiricalDistribution parse_distribution(const Json& doc) {
  try {
    const auto support = need(doc, "support", "distribution").get<std::vector<double>>();
    const auto probs = need(doc, "probs", "distribution").get<std::vector<double>>();
    if (support.empty()) fail(ErrorKind::Invalid, "distribution: empty support");
    double s = 0.0;
    for (double p : probs) {
      if (!(p >= 0.0)) fail(ErrorKind::Invalid, "distribution: negative probability");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) fail(ErrorKind::Invalid, "distribution: probabilities must sum to 1");
    return make_distribution(support, probs);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Invalid, std::string("distribution: ") + e.what());
  }
}

}  // namespace rasdm
