#include "rasdm/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "rasdm/error.hpp"

namespace rasdm {

namespace {

void write(const Json& v, int depth, std::string& out) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      // the default Json object is a std::map, so items() is already sorted
      out += "{\n";
      bool first = true;
      for (const auto& [k, item] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(k).dump() + ": ";
        write(item, depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      const bool flat = std::none_of(v.begin(), v.end(), [](const Json& e) { return e.is_structured(); });
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i) out += ", ";
          write(v[i], depth + 1, out);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        write(v[i], depth + 1, out);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_number(d) : Json(format_number(d)).dump();
      return;
    }
    default:
      out += v.dump();
  }
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<std::size_t> scenario_order(const MarketInstance& inst) {
  std::vector<std::size_t> order(inst.scenarios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return inst.scenarios[a].id < inst.scenarios[b].id; });
  return order;
}

Json by_generator(const MarketInstance& inst, const std::vector<double>& v) {
  Json out = Json::object();
  for (std::size_t i = 0; i < inst.generators.size() && i < v.size(); ++i) out[inst.generators[i].id] = v[i];
  return out;
}

Json by_node(const MarketInstance& inst, const std::vector<double>& v) {
  Json out = Json::object();
  for (std::size_t n = 0; n < inst.network.nodes.size() && n < v.size(); ++n) out[inst.network.nodes[n]] = v[n];
  return out;
}

Json by_line(const MarketInstance& inst, const std::vector<double>& v) {
  Json out = Json::object();
  const auto keys = line_keys(inst);
  for (std::size_t l = 0; l < keys.size() && l < v.size(); ++l) out[keys[l]] = v[l];
  return out;
}

Json by_scenario(const MarketInstance& inst, const std::vector<double>& v) {
  Json out = Json::object();
  for (std::size_t w = 0; w < inst.scenarios.size() && w < v.size(); ++w) out[inst.scenarios[w].id] = v[w];
  return out;
}

double read_number(const Json& v, const std::string& where) {
  if (!v.is_number()) fail(ErrorKind::Invalid, where + ": expected a number");
  return v.get<double>();
}

// values of a {key: number} map in the order of `keys`
std::vector<double> read_map(const Json& obj, const std::vector<std::string>& keys, const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::Invalid, where + ": expected an object keyed by id");
  std::vector<double> out;
  for (const auto& k : keys) {
    if (!obj.contains(k)) fail(ErrorKind::Invalid, where + ": missing \"" + k + "\"");
    out.push_back(read_number(obj.at(k), where + "." + k));
  }
  return out;
}

std::vector<std::string> generator_ids(const MarketInstance& inst) {
  std::vector<std::string> out;
  for (const auto& g : inst.generators) out.push_back(g.id);
  return out;
}

ReportProperty within(const std::string& name, double residual, double tol = 1e-6) {
  return {name, residual, residual <= tol};
}

EquilibriumCandidate candidate_from_dispatch_json(const MarketInstance& inst, const Json& doc) {
  const auto gens = generator_ids(inst);
  const auto lines = line_keys(inst);
  const std::size_t ns = inst.scenarios.size();
  EquilibriumCandidate c;
  c.prices.lambda.assign(ns, {});
  c.flows.assign(ns, std::vector<double>(lines.size(), 0.0));
  const auto x = read_map(doc.at("x"), gens, "x");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    GeneratorStrategy s;
    s.x = x[i];
    s.X.assign(ns, 0.0);
    s.U.assign(ns, 0.0);
    s.V.assign(ns, 0.0);
    c.generators.push_back(std::move(s));
  }
  std::vector<char> seen(ns, 0);
  for (const auto& sc : doc.at("scenarios")) {
    const int w = inst.scenario_index(sc.at("omega").get<std::string>());
    if (w < 0) fail(ErrorKind::Invalid, "dispatch report names an unknown scenario");
    seen[w] = 1;
    const auto X = read_map(sc.at("X"), gens, "X");
    const auto U = read_map(sc.at("U"), gens, "U");
    const auto V = read_map(sc.at("V"), gens, "V");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      c.generators[i].X[w] = X[i];
      c.generators[i].U[w] = U[i];
      c.generators[i].V[w] = V[i];
    }
    c.prices.lambda[w] = read_map(sc.at("lambda"), inst.network.nodes, "lambda");
    c.flows[w] = read_map(sc.at("flows"), lines, "flows");
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    fail(ErrorKind::Invalid, "dispatch report does not cover every scenario");
  return c;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s(buf);
  // tiny negatives can round to "-0"
  if (s == "-0") return "0";
  return s;
}

std::string canonical_json(const Json& doc) {
  std::string out;
  write(doc, 0, out);
  out += "\n";
  return out;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::Numerical, "sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string content_hash(const std::string& text) {
  try {
    return sha256_hex(Json::parse(text).dump());
  } catch (const Json::exception&) {
    return sha256_hex(text);
  }
}

Json properties_json(const std::vector<ReportProperty>& props) {
  Json out = Json::array();
  for (const auto& p : props) out.push_back({{"name", p.name}, {"residual", p.residual}, {"passed", p.passed}});
  return out;
}

Json envelope(const std::string& command, const std::string& hash, const Json& tolerances, Json result,
              const std::vector<ReportProperty>& props) {
  return {{"command", command},
          {"instance_hash", hash},
          {"tolerances", tolerances},
          {"result", std::move(result)},
          {"properties", properties_json(props)}};
}

std::vector<std::string> line_keys(const MarketInstance& inst) {
  std::vector<std::string> out;
  std::map<std::string, int> count;
  for (const auto& l : inst.network.lines) {
    std::string k = inst.network.nodes[l.from] + "-" + inst.network.nodes[l.to];
    const int c = count[k]++;
    if (c) k += "#" + std::to_string(c + 1);
    out.push_back(std::move(k));
  }
  return out;
}

Json scenario_json(const MarketInstance& inst, int scenario, const ScenarioDispatch& d) {
  return {{"omega", inst.scenarios.at(scenario).id},
          {"prob", inst.scenarios[scenario].prob.value},
          {"X", by_generator(inst, d.X)},
          {"U", by_generator(inst, d.U)},
          {"V", by_generator(inst, d.V)},
          {"flows", by_line(inst, d.flow)},
          {"lambda", by_node(inst, d.lambda)},
          {"rho", by_generator(inst, d.rho)},
          {"cost", d.cost}};
}

Json dispatch_json(const MarketInstance& inst, const DispatchSolution& sol) {
  Json scen = Json::array();
  for (std::size_t w : scenario_order(inst)) scen.push_back(scenario_json(inst, static_cast<int>(w), sol.scenarios[w]));
  return {{"x", by_generator(inst, sol.x)},
          {"scenarios", scen},
          {"objective", sol.objective},
          {"committed_total", committed_total(inst, sol.x)},
          {"duals_resolved", sol.duals_resolved}};
}

std::vector<ReportProperty> dispatch_properties(const MarketInstance& inst, const DispatchSolution& sol) {
  double link = 0.0, balance = 0.0, bounds = 0.0, lines = 0.0, expected = 0.0;
  const auto p = inst.probabilities();
  for (std::size_t w = 0; w < sol.scenarios.size(); ++w) {
    const auto& d = sol.scenarios[w];
    for (std::size_t i = 0; i < inst.generators.size(); ++i) {
      link = std::max(link, std::abs(sol.x[i] + d.U[i] - d.V[i] - d.X[i]));
      bounds = std::max({bounds, -d.X[i], d.X[i] - inst.generators[i].capacity[w], -d.U[i], -d.V[i]});
    }
    balance = std::max(balance, max_abs(excess_supply(inst, static_cast<int>(w), d.X, d.flow)));
    for (std::size_t l = 0; l < inst.network.lines.size(); ++l)
      lines = std::max(lines, std::abs(d.flow[l]) - inst.network.lines[l].capacity);
    expected += p[w] * d.cost;
  }
  const double scale = 1.0 + std::abs(sol.objective);
  return {within("nonanticipativity", link),
          within("power_balance", balance),
          within("dispatch_bounds", std::max(0.0, bounds)),
          within("line_limits", std::max(0.0, lines)),
          within("objective_is_expected_cost", std::abs(expected - sol.objective) / scale)};
}

Json settlement_json(const MarketInstance& inst, const SettlementReport& s) {
  return {{"generator_payment", by_generator(inst, s.generator_payment)},
          {"consumer_charge", by_node(inst, s.consumer_charge)},
          {"congestion_rent", s.congestion_rent},
          {"iso_net", s.iso_net}};
}

Json raslp_json(const MarketInstance& inst, const RiskMarketSolution& sol, const std::vector<double>& pi) {
  Json theta = Json::object(), W = Json::object(), member = Json::object(), rows = Json::object(),
       securities = Json::object();
  for (std::size_t a = 0; a < sol.agents.size(); ++a) {
    const auto& id = sol.agents[a];
    theta[id] = sol.theta[a];
    W[id] = by_scenario(inst, sol.W[a]);
    member[id] = sol.membership[a];
    rows[id] = sol.mode[a];
    std::vector<double> pay;
    for (std::size_t w = 0; w < inst.scenarios.size(); ++w)
      pay.push_back(security_settlement(sol, static_cast<int>(a), static_cast<int>(w)));
    securities[id] = by_scenario(inst, pay);
  }
  return {{"dispatch", dispatch_json(inst, sol.dispatch)},
          {"theta", theta},
          {"W", W},
          {"pi", by_scenario(inst, pi)},
          {"membership", member},
          {"risk_rows", rows},
          {"security_settlement", securities},
          {"cut_rounds", sol.cut_rounds},
          {"cuts_added", sol.cuts_added},
          {"objective", sol.objective}};
}

std::vector<ReportProperty> raslp_properties(const MarketInstance& inst, const RiskMarketSolution& sol,
                                             const std::vector<double>& pi) {
  std::vector<ReportProperty> out;
  double neg = 0.0;
  for (double v : pi) neg = std::max(neg, -v);
  out.push_back(within("pi_nonnegative", neg, 1e-10));
  out.push_back(within("pi_sums_to_one", std::abs(std::accumulate(pi.begin(), pi.end(), 0.0) - 1.0), 1e-8));
  for (std::size_t a = 0; a < sol.agents.size(); ++a)
    out.push_back(within("pi_in_risk_set:" + sol.agents[a], sol.membership[a], 1e-7));
  double clear = 0.0;
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
    double s = 0.0;
    for (const auto& row : sol.W) s += row[w];
    clear = std::max(clear, std::abs(s));
  }
  out.push_back(within("securities_clear", clear));
  for (auto& p : dispatch_properties(inst, sol.dispatch))
    if (p.name != "objective_is_expected_cost") out.push_back(std::move(p));
  return out;
}

Json candidate_json(const MarketInstance& inst, const EquilibriumCandidate& cand) {
  Json prices = Json::object(), flows = Json::object(), gens = Json::object();
  for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
    const auto& id = inst.scenarios[w].id;
    if (w < cand.prices.lambda.size()) prices[id] = by_node(inst, cand.prices.lambda[w]);
    if (w < cand.flows.size()) flows[id] = by_line(inst, cand.flows[w]);
  }
  for (std::size_t i = 0; i < inst.generators.size() && i < cand.generators.size(); ++i) {
    const auto& s = cand.generators[i];
    gens[inst.generators[i].id] = {{"x", s.x},
                                   {"X", by_scenario(inst, s.X)},
                                   {"U", by_scenario(inst, s.U)},
                                   {"V", by_scenario(inst, s.V)}};
  }
  return {{"prices", prices}, {"flows", flows}, {"generators", gens}};
}

Json gap_report_json(const GapReport& rep) {
  Json agents = Json::array();
  for (const auto& a : rep.agents)
    agents.push_back(
        {{"agent", a.agent}, {"best_value", a.best_value}, {"candidate_value", a.candidate_value}, {"gap", a.gap}});
  return {{"agents", agents}, {"max_gap", rep.max_gap}, {"equilibrium", rep.equilibrium}};
}

Json fixed_point_json(const MarketInstance& inst, const FixedPointResult& res) {
  Json trace = Json::array();
  for (const auto& r : res.trace)
    trace.push_back({{"iter", r.iter},
                     {"nu", by_scenario(inst, r.nu)},
                     {"x", by_generator(inst, r.x)},
                     {"max_gap", r.max_gap},
                     {"step", r.step}});
  Json eq = Json::array();
  for (const auto& c : res.equilibria) {
    std::vector<double> x;
    for (const auto& g : c.generators) x.push_back(g.x);
    eq.push_back({{"x", by_generator(inst, x)}, {"max_gap", c.max_gap}});
  }
  std::vector<double> x;
  for (const auto& g : res.best.generators) x.push_back(g.x);
  return {{"converged", res.converged},
          {"iterations", res.iterations},
          {"candidate", candidate_json(inst, res.best)},
          {"committed_total", committed_total(inst, x)},
          {"max_gap", res.best.max_gap},
          {"equilibria", eq},
          {"trace", trace}};
}

EquilibriumCandidate candidate_from_json(const MarketInstance& inst, const Json& doc) {
  if (!doc.is_object()) fail(ErrorKind::Invalid, "candidate must be a JSON object");
  try {
    if (doc.contains("result")) return candidate_from_json(inst, doc.at("result"));
    if (doc.contains("candidate")) return candidate_from_json(inst, doc.at("candidate"));
    if (doc.contains("dispatch")) return candidate_from_json(inst, doc.at("dispatch"));
    if (doc.contains("scenarios") && doc.contains("x")) return candidate_from_dispatch_json(inst, doc);
    if (!doc.contains("prices") || !doc.contains("generators"))
      fail(ErrorKind::Invalid, "candidate needs \"prices\" and \"generators\" (or a dispatch report)");

    const auto lines = line_keys(inst);
    const std::size_t ns = inst.scenarios.size();
    EquilibriumCandidate c;
    std::vector<std::string> scen;
    for (const auto& s : inst.scenarios) scen.push_back(s.id);
    for (std::size_t w = 0; w < ns; ++w) {
      const auto& p = doc.at("prices");
      if (!p.contains(scen[w])) fail(ErrorKind::Invalid, "prices: missing scenario " + scen[w]);
      c.prices.lambda.push_back(read_map(p.at(scen[w]), inst.network.nodes, "prices." + scen[w]));
      if (doc.contains("flows") && doc.at("flows").contains(scen[w]))
        c.flows.push_back(read_map(doc.at("flows").at(scen[w]), lines, "flows." + scen[w]));
      else if (lines.empty())
        c.flows.emplace_back();
      else
        fail(ErrorKind::Invalid, "flows: missing scenario " + scen[w]);
    }
    for (const auto& g : inst.generators) {
      const auto& gs = doc.at("generators");
      if (!gs.contains(g.id)) fail(ErrorKind::Invalid, "generators: missing " + g.id);
      const auto& e = gs.at(g.id);
      GeneratorStrategy s;
      s.x = read_number(e.at("x"), g.id + ".x");
      s.X = read_map(e.at("X"), scen, g.id + ".X");
      s.U = read_map(e.at("U"), scen, g.id + ".U");
      s.V = read_map(e.at("V"), scen, g.id + ".V");
      c.generators.push_back(std::move(s));
    }
    return c;
  } catch (const Json::exception& e) {
    fail(ErrorKind::Invalid, std::string("candidate: ") + e.what());
  }
}

std::vector<double> commitment_from_json(const MarketInstance& inst, const Json& doc) {
  const std::size_t ng = inst.generators.size();
  if (doc.is_number()) {
    if (ng != 1) fail(ErrorKind::Invalid, "x: a single number needs a single generator");
    return {doc.get<double>()};
  }
  if (doc.is_array()) {
    if (doc.size() != ng) fail(ErrorKind::Invalid, "x: expected " + std::to_string(ng) + " entries");
    std::vector<double> out;
    for (const auto& v : doc) out.push_back(read_number(v, "x"));
    return out;
  }
  if (doc.is_object()) {
    if (doc.contains("result")) return commitment_from_json(inst, doc.at("result"));
    if (doc.contains("dispatch") && doc.at("dispatch").is_object()) return commitment_from_json(inst, doc.at("dispatch"));
    if (doc.contains("x") && doc.at("x").is_structured()) return commitment_from_json(inst, doc.at("x"));
    return read_map(doc, generator_ids(inst), "x");
  }
  fail(ErrorKind::Invalid, "x: expected a number, an array or a map by generator id");
}

Json property_reports_json(const std::vector<PropertyReport>& reps) {
  Json suites = Json::array();
  bool all = true;
  for (const auto& r : reps) {
    Json checks = Json::array();
    for (const auto& c : r.checks)
      checks.push_back({{"name", c.name},
                        {"passed", c.passed},
                        {"residual", c.residual},
                        {"trials", c.trials},
                        {"detail", c.detail},
                        {"informational", c.informational}});
    suites.push_back({{"suite", r.suite}, {"passed", r.passed()}, {"checks", checks}});
    all = all && r.passed();
  }
  return {{"suites", suites}, {"passed", all}};
}

}  // namespace rasdm
