#define RASDM_BUILDING
#include "rasdm/rasdm.h"

#include <algorithm>
#include <cmath>
#include <new>
#include <string>

#include "rasdm/dispatch.hpp"
#include "rasdm/equilibrium.hpp"
#include "rasdm/error.hpp"
#include "rasdm/io.hpp"
#include "rasdm/newsvendor.hpp"
#include "rasdm/properties.hpp"
#include "rasdm/report.hpp"
#include "rasdm/riskmarket.hpp"

struct rasdm_instance {
  rasdm::MarketInstance model;
  std::string hash;
};

struct rasdm_report {
  rasdm::Json doc;
  std::string text;
};

namespace {

using namespace rasdm;

thread_local std::string last_error;

rasdm_status status_of(ErrorKind k) {
  switch (k) {
    case ErrorKind::Invalid: return RASDM_INVALID;
    case ErrorKind::Infeasible: return RASDM_INFEASIBLE;
    case ErrorKind::EmptyIntersection: return RASDM_EMPTY_INTERSECTION;
    case ErrorKind::Numerical: return RASDM_NUMERICAL;
    case ErrorKind::NotConverged: return RASDM_NOT_CONVERGED;
  }
  return RASDM_INTERNAL;
}

template <class F>
rasdm_status guarded(F&& body) {
  last_error.clear();
  try {
    return body();
  } catch (const Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const Json::exception& e) {
    last_error = e.what();
    return RASDM_INVALID;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RASDM_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RASDM_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorKind::Invalid, std::string(what) + " must not be NULL");
}

rasdm_status emit(Json doc, rasdm_report** out, rasdm_status status = RASDM_OK) {
  auto* rep = new rasdm_report{std::move(doc), {}};
  rep->text = canonical_json(rep->doc);
  *out = rep;
  return status;
}

Json parse_text(const char* text, const char* what) {
  need(text, what);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Invalid, std::string(what) + ": parse error: " + e.what());
  }
}

rasdm_options options_or_default(const rasdm_options* opt) {
  rasdm_options o;
  rasdm_options_default(&o);
  return opt ? *opt : o;
}

Json lp_tolerances() {
  const lp::SolveOptions s;
  return {{"lp_feasibility", s.feasibility_tol}, {"lp_optimality", s.optimality_tol}, {"lp_certificate", s.certify_tol},
          {"property", 1e-6}};
}

void require_risk_block(const MarketInstance& inst, const char* command) {
  if (!inst.has_risk_block) fail(ErrorKind::Invalid, std::string(command) + " needs a \"risk\" block in the instance");
}

// tol == 0 picks the command's own default
double tol_or(const rasdm_options& o, double fallback) {
  if (o.tol == 0.0) return fallback;
  if (!(o.tol > 0.0) || !std::isfinite(o.tol)) fail(ErrorKind::Invalid, "tolerance must be positive");
  return o.tol;
}

double gap_tol(const rasdm_options& o) { return tol_or(o, FixedPointOptions{}.tol); }

FixedPointOptions fixed_point_options(const rasdm_options& o) {
  FixedPointOptions f;
  f.damping = o.damping;
  f.max_iters = o.max_iters;
  f.tol = gap_tol(o);
  if (o.max_iters < 1) fail(ErrorKind::Invalid, "max_iters must be at least 1");
  return f;
}

Json equilibrium_tolerances(const rasdm_options& o) {
  auto t = lp_tolerances();
  t["gap"] = gap_tol(o);
  t["damping"] = o.damping;
  t["max_iters"] = o.max_iters;
  return t;
}

Json risks_json(const MarketInstance& inst, const std::vector<AgentRisk>& risks) {
  Json out = Json::object();
  for (std::size_t i = 0; i < risks.size(); ++i) out[inst.generators[i].id] = risk_to_json(risks[i]);
  return out;
}

std::vector<ReportProperty> gap_properties(const GapReport& rep, double tol) {
  std::vector<ReportProperty> out;
  for (const auto& a : rep.agents) out.push_back({"gap:" + a.agent, a.gap, a.gap <= tol && a.gap >= -tol});
  return out;
}

}  // namespace

extern "C" {

const char* rasdm_version(void) { return "1.0.0"; }

const char* rasdm_status_name(rasdm_status s) {
  switch (s) {
    case RASDM_OK: return "ok";
    case RASDM_INVALID: return "invalid";
    case RASDM_INFEASIBLE: return "infeasible";
    case RASDM_EMPTY_INTERSECTION: return "empty_intersection";
    case RASDM_NUMERICAL: return "numerical";
    case RASDM_NOT_CONVERGED: return "not_converged";
    case RASDM_CHECK_FAILED: return "check_failed";
    case RASDM_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* rasdm_last_error(void) { return last_error.c_str(); }

void rasdm_options_default(rasdm_options* opt) {
  if (!opt) return;
  const FixedPointOptions f;
  const PropertyOptions p;
  opt->tol = 0.0;
  opt->seed = p.seed;
  opt->max_iters = f.max_iters;
  opt->damping = f.damping;
  opt->trials = p.trials;
}

rasdm_status rasdm_instance_from_json(const char* text, rasdm_instance** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(text, "instance text");
    auto model = parse_instance_text(text);
    require_valid(model);
    *out = new rasdm_instance{std::move(model), content_hash(text)};
    return RASDM_OK;
  });
}

rasdm_status rasdm_instance_from_file(const char* path, rasdm_instance** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(path, "path");
    const std::string text = read_file(path);
    return rasdm_instance_from_json(text.c_str(), out);
  });
}

void rasdm_instance_free(rasdm_instance* inst) { delete inst; }

size_t rasdm_instance_generators(const rasdm_instance* inst) { return inst ? inst->model.generators.size() : 0; }

size_t rasdm_instance_scenarios(const rasdm_instance* inst) { return inst ? inst->model.scenarios.size() : 0; }

const char* rasdm_instance_hash(const rasdm_instance* inst) { return inst ? inst->hash.c_str() : ""; }

rasdm_status rasdm_solve_sdm(const rasdm_instance* inst, rasdm_report** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = nullptr;
    const auto& m = inst->model;
    const auto sol = solve_slp(m);
    return emit(envelope("solve-sdm", inst->hash, lp_tolerances(), dispatch_json(m, sol), dispatch_properties(m, sol)),
                out);
  });
}

rasdm_status rasdm_recourse(const rasdm_instance* inst, const char* x_json, const char* scenario, rasdm_report** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = nullptr;
    const auto& m = inst->model;
    const auto x = commitment_from_json(m, parse_text(x_json, "x"));
    std::vector<int> which;
    if (scenario) {
      const int w = m.scenario_index(scenario);
      if (w < 0) fail(ErrorKind::Invalid, std::string("unknown scenario \"") + scenario + "\"");
      which.push_back(w);
    } else {
      for (std::size_t w = 0; w < m.scenarios.size(); ++w) which.push_back(static_cast<int>(w));
      std::sort(which.begin(), which.end(), [&](int a, int b) { return m.scenarios[a].id < m.scenarios[b].id; });
    }
    Json scen = Json::array();
    double link = 0.0, balance = 0.0, deficit = 0.0;
    for (int w : which) {
      const auto d = solve_recourse(m, x, w);
      auto j = scenario_json(m, w, d);
      const auto s = settle(m, d, w);
      j["settlement"] = settlement_json(m, s);
      Json profit = Json::object();
      for (std::size_t i = 0; i < m.generators.size(); ++i)
        profit[m.generators[i].id] = generator_profit(m, d, static_cast<int>(i));
      j["profit"] = profit;
      scen.push_back(std::move(j));
      for (std::size_t i = 0; i < x.size(); ++i) link = std::max(link, std::abs(x[i] + d.U[i] - d.V[i] - d.X[i]));
      for (double e : excess_supply(m, w, d.X, d.flow)) balance = std::max(balance, std::abs(e));
      deficit = std::max(deficit, -s.iso_net);
    }
    Json xm = Json::object();
    for (std::size_t i = 0; i < x.size(); ++i) xm[m.generators[i].id] = x[i];
    const std::vector<ReportProperty> props{{"nonanticipativity", link, link <= 1e-6},
                                            {"power_balance", balance, balance <= 1e-6},
                                            {"iso_revenue_adequate", std::max(0.0, deficit), deficit <= 1e-6}};
    return emit(envelope("recourse", inst->hash, lp_tolerances(), {{"x", xm}, {"scenarios", scen}}, props), out);
  });
}

rasdm_status rasdm_solve_raslp(const rasdm_instance* inst, rasdm_report** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = nullptr;
    const auto& m = inst->model;
    require_risk_block(m, "solve-raslp");
    const auto risks = agent_risks(m);
    const RaslpOptions opt;
    const auto sol = solve_raslp(m, risks, opt);
    const auto pi = extract_risk_adjusted_measure(m, risks, sol);
    auto tol = lp_tolerances();
    tol["cut"] = opt.cut_tol;
    tol["max_cut_rounds"] = opt.max_cut_rounds;
    tol["enumeration_bound"] = opt.enumeration_bound;
    tol["membership"] = 1e-7;
    auto result = raslp_json(m, sol, pi);
    Json rs = Json::object();
    for (const auto& r : risks) rs[r.agent] = {{"risk", risk_to_json(r.risk)}, {"source", r.source}};
    result["risks"] = rs;
    return emit(envelope("solve-raslp", inst->hash, tol, std::move(result), raslp_properties(m, sol, pi)), out);
  });
}

rasdm_status rasdm_newsvendor(const char* distribution_json, const rasdm_newsvendor_args* args, rasdm_report** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    need(args, "args");
    const auto doc = parse_text(distribution_json, "distribution");
    const auto dist = parse_distribution(doc);
    const auto mode = args->mode == RASDM_WITH_TRADING ? TradingMode::WithTrading : TradingMode::NoTrading;
    // the closed forms see the spectrum only through beta_bar, so one level suffices
    const RiskSpec spec{args->kappa, {{args->beta_bar, 1.0}}};
    const double q = precommit_quantile(mode, args->r_u, args->r_v, args->kappa, args->beta_bar);
    spec.check();
    const PrecommitProblem prob{args->r_u, args->r_v, 0.0, mode};
    const double tol = 1e-9;
    const auto chk = check_newsvendor(prob, dist, spec, tol);
    const auto coeffs = RiskCoefficients::of(spec);
    const double bound = profit_lower_bound(args->r_u, args->r_v, chk.x_star, coeffs, mode);

    // atoms at x* void the bound guarantee; surface how far F(x*) overshoots
    const double atom = dist.cdf(chk.x_star) - q;
    Json result = {{"mode", to_string(mode)},
                   {"r_u", args->r_u},
                   {"r_v", args->r_v},
                   {"kappa", args->kappa},
                   {"beta_bar", args->beta_bar},
                   {"alpha", coeffs.alpha},
                   {"quantile", q},
                   {"x_star", chk.x_star},
                   {"oracle_x_star", chk.oracle_x_star},
                   {"oracle_argmin", chk.oracle.argmin},
                   {"agree", chk.agree},
                   {"profit_lower_bound", bound},
                   {"cdf_at_x_star", dist.cdf(chk.x_star)},
                   {"atom_past_quantile", atom},
                   {"bound_guaranteed", std::abs(atom) <= 1e-12}};
    const std::vector<ReportProperty> props{{"closed_form_in_oracle_argmin", chk.agree ? 0.0 : 1.0, chk.agree},
                                            {"kappa_in_coherence_domain", 0.0, true}};
    Json tols = {{"argmin", tol}, {"probability_sum", 1e-9}};
    return emit(envelope("newsvendor", content_hash(distribution_json), tols, std::move(result), props), out);
  });
}

rasdm_status rasdm_equilibrium_iterate(const rasdm_instance* inst, const rasdm_options* opt, rasdm_report** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = nullptr;
    const auto& m = inst->model;
    require_risk_block(m, "equilibrium");
    const auto o = options_or_default(opt);
    const auto risks = generator_risks(m);
    const auto res = iterate_fixed_point(m, risks, fixed_point_options(o));
    const auto gaps = verify_equilibrium(m, res.best, risks, gap_tol(o));
    auto result = fixed_point_json(m, res);
    result["gaps"] = gap_report_json(gaps);
    result["risks"] = risks_json(m, risks);
    return emit(envelope("equilibrium", inst->hash, equilibrium_tolerances(o), std::move(result),
                         gap_properties(gaps, gap_tol(o))),
                out);
  });
}

rasdm_status rasdm_equilibrium_verify(const rasdm_instance* inst, const char* candidate_json_text,
                                      const rasdm_options* opt, rasdm_report** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = nullptr;
    const auto& m = inst->model;
    require_risk_block(m, "equilibrium");
    const auto o = options_or_default(opt);
    const auto cand = candidate_from_json(m, parse_text(candidate_json_text, "candidate"));
    const auto risks = generator_risks(m);
    const auto gaps = verify_equilibrium(m, cand, risks, gap_tol(o));
    Json result = {{"candidate", candidate_json(m, cand)}, {"gaps", gap_report_json(gaps)}, {"risks", risks_json(m, risks)}};
    return emit(envelope("equilibrium", inst->hash, equilibrium_tolerances(o), std::move(result),
                         gap_properties(gaps, gap_tol(o))),
                out);
  });
}

rasdm_status rasdm_equilibrium_sweep(const rasdm_instance* inst, const double* kappas, size_t count,
                                     const rasdm_options* opt, rasdm_report** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = nullptr;
    if (count == 0) fail(ErrorKind::Invalid, "kappa sweep needs at least one value");
    need(kappas, "kappas");
    const auto& m = inst->model;
    require_risk_block(m, "equilibrium");
    const auto o = options_or_default(opt);
    const auto fp = fixed_point_options(o);
    const auto base = generator_risks(m);
    Json rows = Json::array();
    double rise = 0.0, worst_gap = 0.0;
    double prev = 0.0;
    for (size_t k = 0; k < count; ++k) {
      auto risks = base;
      for (auto& r : risks) {
        auto* spec = std::get_if<RiskSpec>(&r);
        if (!spec) fail(ErrorKind::Invalid, "kappa sweep needs spectral risk specs for every generator");
        spec->kappa = kappas[k];
        spec->check();
      }
      const auto res = iterate_fixed_point(m, risks, fp);
      const auto gaps = verify_equilibrium(m, res.best, risks, fp.tol);
      std::vector<double> x;
      for (const auto& g : res.best.generators) x.push_back(g.x);
      const double total = committed_total(m, x);
      Json xm = Json::object();
      for (std::size_t i = 0; i < x.size(); ++i) xm[m.generators[i].id] = x[i];
      rows.push_back({{"kappa", kappas[k]},
                      {"x", xm},
                      {"committed_total", total},
                      {"converged", res.converged},
                      {"iterations", res.iterations},
                      {"max_gap", gaps.max_gap}});
      if (k) rise = std::max(rise, total - prev);
      prev = total;
      worst_gap = std::max(worst_gap, gaps.max_gap);
    }
    const std::vector<ReportProperty> props{{"committed_total_nonincreasing", rise, rise <= 1e-6},
                                            {"max_gap", worst_gap, worst_gap <= fp.tol}};
    return emit(envelope("equilibrium", inst->hash, equilibrium_tolerances(o), {{"sweep", rows}}, props), out);
  });
}

rasdm_status rasdm_check_properties(const rasdm_instance* inst, const char* suite, const rasdm_options* opt,
                                    rasdm_report** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = nullptr;
    const auto o = options_or_default(opt);
    PropertyOptions po;
    po.seed = o.seed;
    po.trials = o.trials;
    po.tol = tol_or(o, po.tol);
    if (o.trials < 1) fail(ErrorKind::Invalid, "trials must be at least 1");
    const auto reps = check_properties(inst->model, suite ? suite : "all", po);
    std::vector<ReportProperty> props;
    bool ok = true;
    for (const auto& r : reps)
      for (const auto& c : r.checks) {
        if (c.informational) continue;
        props.push_back({r.suite + "/" + c.name, c.residual, c.passed});
        ok = ok && c.passed;
      }
    Json tols = lp_tolerances();
    tols["property"] = po.tol;
    tols["seed"] = po.seed;
    tols["trials"] = po.trials;
    return emit(envelope("check-properties", inst->hash, tols, property_reports_json(reps), props), out,
                ok ? RASDM_OK : RASDM_CHECK_FAILED);
  });
}

const char* rasdm_report_json(const rasdm_report* rep) { return rep ? rep->text.c_str() : ""; }

rasdm_status rasdm_report_number(const rasdm_report* rep, const char* pointer, double* value) {
  return guarded([&] {
    need(rep, "report");
    need(pointer, "pointer");
    need(value, "value");
    const auto& v = rep->doc.at(Json::json_pointer(pointer));
    if (!v.is_number()) fail(ErrorKind::Invalid, std::string(pointer) + " is not a number");
    *value = v.get<double>();
    return RASDM_OK;
  });
}

rasdm_status rasdm_report_extract(const rasdm_report* rep, const char* pointer, rasdm_report** out) {
  return guarded([&] {
    need(rep, "report");
    need(pointer, "pointer");
    need(out, "out");
    *out = nullptr;
    return emit(rep->doc.at(Json::json_pointer(pointer)), out);
  });
}

void rasdm_report_free(rasdm_report* rep) { delete rep; }

}  // extern "C"
