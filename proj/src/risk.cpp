#include "rasdm/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rasdm/error.hpp"
#include "rasdm/lp.hpp"

namespace rasdm {

double RiskSpec::beta_bar() const {
  double s = 0.0;
  for (const auto& p : spectrum) s += p.weight * p.beta;
  return s;
}

void RiskSpec::check() const {
  if (spectrum.empty()) fail(ErrorKind::Invalid, "risk spec: empty spectrum");
  double w = 0.0;
  for (const auto& p : spectrum) {
    if (!(p.beta > 0.0 && p.beta <= 1.0)) fail(ErrorKind::Invalid, "risk spec: beta must lie in (0,1]");
    if (!(p.weight >= 0.0)) fail(ErrorKind::Invalid, "risk spec: negative spectrum weight");
    w += p.weight;
  }
  if (std::abs(w - 1.0) > 1e-12) fail(ErrorKind::Invalid, "risk spec: spectrum weights must sum to 1");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) fail(ErrorKind::Invalid, "risk spec: kappa must be >= 0");
  if (kappa * beta_bar() > 1.0 + 1e-12) fail(ErrorKind::Invalid, "risk spec: kappa exceeds 1/beta_bar");
}

namespace {

void check_pair(std::span<const double> values, std::span<const double> probs) {
  if (values.size() != probs.size() || values.empty())
    fail(ErrorKind::Invalid, "random variable: values and probabilities must be non-empty and aligned");
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) fail(ErrorKind::Invalid, "beta must lie in (0,1]");
}

std::vector<std::size_t> ascending(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return idx;
}

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a)); }

// adds scale * (P restricted to the lowest-beta tail of Z) into out
void add_tail(std::span<const double> values, std::span<const double> probs, double beta, double scale,
              std::vector<double>& out) {
  const auto idx = ascending(values);
  double acc = 0.0;
  for (std::size_t k = 0; k < idx.size() && acc < beta;) {
    std::size_t e = k;
    double group = 0.0;
    while (e < idx.size() && same_value(values[idx[k]], values[idx[e]])) group += probs[idx[e++]];
    const double take = std::min(group, beta - acc);
    if (group > 0.0)
      for (std::size_t t = k; t < e; ++t) out[idx[t]] += scale * probs[idx[t]] * (take / group);
    acc += take;
    k = e;
  }
}

}  // namespace

double expectation(std::span<const double> values, std::span<const double> probs) {
  check_pair(values, probs);
  double e = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) e += values[k] * probs[k];
  return e;
}

double q_beta(std::span<const double> values, std::span<const double> probs, double beta) {
  check_pair(values, probs);
  check_beta(beta);
  // scan eta over the support; prefix sums give each evaluation in O(1)
  const auto idx = ascending(values);
  const std::size_t n = idx.size();
  double below_p = 0.0, below_pz = 0.0;
  double above_p = 0.0, above_pz = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    above_p += probs[idx[k]];
    above_pz += probs[idx[k]] * values[idx[k]];
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double eta = values[idx[k]];
    const double f = (1.0 - beta) * (eta * below_p - below_pz) + beta * (above_pz - eta * above_p);
    best = std::min(best, f);
    below_p += probs[idx[k]];
    below_pz += probs[idx[k]] * values[idx[k]];
    above_p -= probs[idx[k]];
    above_pz -= probs[idx[k]] * values[idx[k]];
  }
  return std::max(best, 0.0);
}

double lower_tail_mean(std::span<const double> values, std::span<const double> probs, double beta) {
  check_pair(values, probs);
  check_beta(beta);
  std::vector<double> tail(values.size(), 0.0);
  add_tail(values, probs, beta, 1.0, tail);
  double s = 0.0, mass = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    s += tail[k] * values[k];
    mass += tail[k];
  }
  return s / mass;
}

double rho_disutility(std::span<const double> values, std::span<const double> probs, const RiskSpec& spec) {
  spec.check();
  double r = -expectation(values, probs);
  if (spec.kappa == 0.0) return r;
  for (const auto& p : spec.spectrum)
    if (p.weight > 0.0) r += spec.kappa * p.weight * q_beta(values, probs, p.beta);
  return r;
}

std::vector<double> worst_case_measure(std::span<const double> values, std::span<const double> probs,
                                       const RiskSpec& spec) {
  spec.check();
  check_pair(values, probs);
  const double base = 1.0 - spec.kappa * spec.beta_bar();
  std::vector<double> mu(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) mu[k] = base * probs[k];
  if (spec.kappa > 0.0)
    for (const auto& p : spec.spectrum)
      if (p.weight > 0.0) add_tail(values, probs, p.beta, spec.kappa * p.weight, mu);
  return mu;
}

namespace {

// vertices of {Q : 0 <= Q <= P/beta, sum Q = 1}: all but one coordinate at a bound
bool tail_vertices(std::span<const double> probs, double beta, std::size_t bound,
                   std::vector<std::vector<double>>& out) {
  const std::size_t n = probs.size();
  const double tol = 1e-12;
  std::vector<char> in(n, 0);
  std::size_t visits = 0;
  bool ok = true;
  auto emit = [&](double mass) {
    if (std::abs(mass - beta) <= tol) {
      std::vector<double> q(n, 0.0);
      for (std::size_t k = 0; k < n; ++k)
        if (in[k]) q[k] = probs[k] / beta;
      out.push_back(std::move(q));
    } else {
      for (std::size_t f = 0; f < n; ++f) {
        if (in[f] || probs[f] <= beta - mass + tol) continue;
        std::vector<double> q(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
          if (in[k]) q[k] = probs[k] / beta;
        q[f] = (beta - mass) / beta;
        out.push_back(std::move(q));
      }
    }
    if (out.size() > bound) ok = false;
  };
  auto dfs = [&](auto&& self, std::size_t k, double mass) -> void {
    if (!ok) return;
    if (++visits > 50 * bound + 100000) {
      ok = false;
      return;
    }
    if (k == n) {
      emit(mass);
      return;
    }
    if (mass + probs[k] <= beta + tol) {
      in[k] = 1;
      self(self, k + 1, mass + probs[k]);
      in[k] = 0;
    }
    self(self, k + 1, mass);
  };
  dfs(dfs, 0, 0.0);
  return ok;
}

bool in_hull_of_others(const std::vector<std::vector<double>>& pts, std::size_t skip) {
  lp::LinearProgram prog;
  const std::size_t n = pts[skip].size();
  std::vector<int> cols;
  for (std::size_t m = 0; m < pts.size(); ++m)
    if (m != skip) cols.push_back(prog.add_column(0.0, 0.0, lp::kInf));
  const int sum = prog.add_row(lp::Sense::Equal, 1.0);
  for (int c : cols) prog.add_entry(sum, c, 1.0);
  for (std::size_t w = 0; w < n; ++w) {
    const int r = prog.add_row(lp::Sense::Equal, pts[skip][w]);
    std::size_t c = 0;
    for (std::size_t m = 0; m < pts.size(); ++m)
      if (m != skip) prog.add_entry(r, cols[c++], pts[m][w]);
  }
  return lp::solve(prog).optimal();
}

}  // namespace

PolyhedralRiskSet extreme_points(const RiskSpec& spec, std::span<const double> probs, std::size_t bound) {
  spec.check();
  const std::size_t n = probs.size();
  PolyhedralRiskSet set;
  if (spec.kappa == 0.0) {
    set.points.emplace_back(probs.begin(), probs.end());
    return set;
  }
  const double base = 1.0 - spec.kappa * spec.beta_bar();
  std::vector<std::vector<double>> acc{std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) acc[0][k] = base * probs[k];
  for (const auto& p : spec.spectrum) {
    if (p.weight == 0.0) continue;
    std::vector<std::vector<double>> verts;
    if (!tail_vertices(probs, p.beta, bound, verts))
      fail(ErrorKind::Invalid, "extreme_points: enumeration bound exceeded; use cutting planes");
    const double scale = spec.kappa * p.weight * p.beta;
    std::vector<std::vector<double>> next;
    for (const auto& a : acc)
      for (const auto& v : verts) {
        std::vector<double> s(a);
        for (std::size_t k = 0; k < n; ++k) s[k] += scale * v[k];
        next.push_back(std::move(s));
        if (next.size() > bound) fail(ErrorKind::Invalid, "extreme_points: enumeration bound exceeded; use cutting planes");
      }
    acc = std::move(next);
  }
  // drop duplicates, then points that are mixtures of the others (only sums of several spectra produce them)
  std::sort(acc.begin(), acc.end());
  std::vector<std::vector<double>> uniq;
  for (auto& a : acc) {
    bool dup = !uniq.empty();
    if (dup)
      for (std::size_t k = 0; k < n; ++k)
        if (std::abs(uniq.back()[k] - a[k]) > 1e-12) {
          dup = false;
          break;
        }
    if (!dup) uniq.push_back(std::move(a));
  }
  std::size_t active = 0;
  for (const auto& p : spec.spectrum) active += p.weight > 0.0;
  if (active > 1 && uniq.size() > 2) {
    for (std::size_t m = uniq.size(); m-- > 0;) {
      if (uniq.size() <= 1) break;
      if (in_hull_of_others(uniq, m)) uniq.erase(uniq.begin() + static_cast<std::ptrdiff_t>(m));
    }
  }
  set.points = std::move(uniq);
  return set;
}

double risk_value_lp(std::span<const double> values, const PolyhedralRiskSet& set) {
  if (set.points.empty()) fail(ErrorKind::Invalid, "risk_value_lp: empty risk set");
  lp::LinearProgram prog;
  const int theta = prog.add_column(1.0, -lp::kInf, lp::kInf, "theta");
  for (const auto& pm : set.points) {
    if (pm.size() != values.size()) fail(ErrorKind::Invalid, "risk_value_lp: measure size mismatch");
    double rhs = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) rhs += pm[k] * values[k];
    const int r = prog.add_row(lp::Sense::GreaterEqual, rhs);
    prog.add_entry(r, theta, 1.0);
  }
  const auto sol = lp::solve(prog);
  if (!sol.optimal()) fail(ErrorKind::Numerical, "risk_value_lp: epigraph LP failed");
  return sol.objective;
}

double disutility(std::span<const double> profit, std::span<const double> probs, const AgentRisk& risk) {
  if (const auto* spec = std::get_if<RiskSpec>(&risk)) return rho_disutility(profit, probs, *spec);
  const auto& set = std::get<PolyhedralRiskSet>(risk);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& pm : set.points) best = std::max(best, -expectation(profit, pm));
  return best;
}

std::vector<double> separating_measure(std::span<const double> cost, std::span<const double> probs,
                                       const AgentRisk& risk) {
  if (const auto* spec = std::get_if<RiskSpec>(&risk)) {
    std::vector<double> profit(cost.begin(), cost.end());
    for (double& v : profit) v = -v;
    return worst_case_measure(profit, probs, *spec);
  }
  const auto& set = std::get<PolyhedralRiskSet>(risk);
  std::size_t arg = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < set.points.size(); ++m) {
    const double v = expectation(cost, set.points[m]);
    if (v > best + 1e-15) {
      best = v;
      arg = m;
    }
  }
  return set.points.at(arg);
}

namespace {

// adds columns representing one member mu of the risk set; returns, per
// scenario, the linear expression mu(w) = constant[w] + sum coef * column
struct MeasureExpr {
  std::vector<double> constant;
  std::vector<std::vector<std::pair<int, double>>> terms;
};

MeasureExpr represent(lp::LinearProgram& prog, const AgentRisk& risk, std::span<const double> probs) {
  const std::size_t n = probs.size();
  MeasureExpr e{std::vector<double>(n, 0.0), std::vector<std::vector<std::pair<int, double>>>(n)};
  if (const auto* spec = std::get_if<RiskSpec>(&risk)) {
    const double base = 1.0 - spec->kappa * spec->beta_bar();
    for (std::size_t w = 0; w < n; ++w) e.constant[w] = base * probs[w];
    if (spec->kappa == 0.0) return e;
    for (const auto& p : spec->spectrum) {
      if (p.weight == 0.0) continue;
      const int sum = prog.add_row(lp::Sense::Equal, 1.0);
      for (std::size_t w = 0; w < n; ++w) {
        const int q = prog.add_column(0.0, 0.0, probs[w] / p.beta);
        prog.add_entry(sum, q, 1.0);
        e.terms[w].push_back({q, spec->kappa * p.weight * p.beta});
      }
    }
    return e;
  }
  const auto& set = std::get<PolyhedralRiskSet>(risk);
  const int sum = prog.add_row(lp::Sense::Equal, 1.0);
  for (const auto& pm : set.points) {
    const int c = prog.add_column(0.0, 0.0, lp::kInf);
    prog.add_entry(sum, c, 1.0);
    for (std::size_t w = 0; w < n; ++w)
      if (pm[w] != 0.0) e.terms[w].push_back({c, pm[w]});
  }
  return e;
}

}  // namespace

double membership_residual(std::span<const double> pi, std::span<const double> probs, const AgentRisk& risk) {
  check_risk(risk, probs.size());
  lp::LinearProgram prog;
  const auto e = represent(prog, risk, probs);
  for (std::size_t w = 0; w < probs.size(); ++w) {
    const int r = prog.add_row(lp::Sense::Equal, pi[w] - e.constant[w]);
    for (const auto& [c, a] : e.terms[w]) prog.add_entry(r, c, a);
    prog.add_entry(r, prog.add_column(1.0, 0.0, lp::kInf), 1.0);
    prog.add_entry(r, prog.add_column(1.0, 0.0, lp::kInf), -1.0);
  }
  const auto sol = lp::solve(prog);
  if (!sol.optimal()) fail(ErrorKind::Numerical, "membership LP failed");
  return sol.objective;
}

std::optional<std::vector<double>> common_measure(const std::vector<AgentRisk>& risks, std::span<const double> probs) {
  lp::LinearProgram prog;
  const std::size_t n = probs.size();
  std::vector<int> pi(n);
  for (std::size_t w = 0; w < n; ++w) pi[w] = prog.add_column(0.0, 0.0, lp::kInf);
  for (const auto& risk : risks) {
    check_risk(risk, n);
    const auto e = represent(prog, risk, probs);
    for (std::size_t w = 0; w < n; ++w) {
      const int r = prog.add_row(lp::Sense::Equal, -e.constant[w]);
      for (const auto& [c, a] : e.terms[w]) prog.add_entry(r, c, a);
      prog.add_entry(r, pi[w], -1.0);
    }
  }
  const auto sol = lp::solve(prog);
  if (sol.status == lp::Status::Infeasible) return std::nullopt;
  if (!sol.optimal()) fail(ErrorKind::Numerical, "intersection LP failed");
  std::vector<double> out(n);
  for (std::size_t w = 0; w < n; ++w) out[w] = sol.x[pi[w]];
  return out;
}

double risk_radius(const AgentRisk& risk, std::span<const double> probs) {
  if (const auto* spec = std::get_if<RiskSpec>(&risk)) {
    double r = 0.0;
    for (const auto& p : spec->spectrum) r += p.weight * p.beta * (1.0 - p.beta);
    return spec->kappa * r;
  }
  double best = 0.0;
  for (const auto& pm : std::get<PolyhedralRiskSet>(risk).points) {
    double tv = 0.0;
    for (std::size_t w = 0; w < probs.size(); ++w) tv += 0.5 * std::abs(pm[w] - probs[w]);
    best = std::max(best, tv);
  }
  return best;
}

void check_risk(const AgentRisk& risk, std::size_t scenarios) {
  if (const auto* spec = std::get_if<RiskSpec>(&risk)) {
    spec->check();
    return;
  }
  const auto& set = std::get<PolyhedralRiskSet>(risk);
  if (set.points.empty()) fail(ErrorKind::Invalid, "risk set: no extreme points");
  for (const auto& pm : set.points) {
    if (pm.size() != scenarios) fail(ErrorKind::Invalid, "risk set: measure length differs from scenario count");
    double s = 0.0;
    for (double v : pm) {
      if (!(v >= 0.0)) fail(ErrorKind::Invalid, "risk set: negative probability");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) fail(ErrorKind::Invalid, "risk set: measure does not sum to 1");
  }
}

}  // namespace rasdm
