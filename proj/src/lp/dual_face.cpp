#include <cmath>

#include "lp/engine.hpp"
#include "rasdm/error.hpp"

namespace rasdm::lp {

// The optimal dual set of an LP is the face cut out by complementary
// slackness against any optimal primal point.  We build that face as an LP
// in the row duals and walk the requested components lexicographically,
// re-optimizing from the previous basis each time.
LpSolution resolve_degenerate_duals(const LinearProgram& lp, const LpSolution& sol, DualPreference pref,
                                    const std::vector<int>& rows, const SolveOptions& opt) {
  if (!sol.optimal()) fail(ErrorKind::Invalid, "resolve_degenerate_duals: solution is not optimal");
  if (!primal_degenerate(lp, sol)) return sol;

  const int n = lp.num_cols(), m = lp.num_rows();
  LinearProgram face;
  for (int i = 0; i < m; ++i) {
    double lo = lp.sense[i] == Sense::LessEqual ? -kInf : 0.0;
    double hi = lp.sense[i] == Sense::GreaterEqual ? kInf : 0.0;
    if (lp.sense[i] == Sense::Equal) lo = -kInf, hi = kInf;
    const double tol = 1e-9 * (1.0 + std::abs(lp.rhs[i]));
    if (lp.sense[i] != Sense::Equal && std::abs(sol.row_activity[i] - lp.rhs[i]) > tol) lo = hi = 0.0;
    face.add_column(0.0, lo, hi);
  }
  std::vector<int> face_row(n, -1);
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower[j], hi = lp.upper[j], xj = sol.x[j];
    if (lo == hi) continue;
    const double tol = 1e-9 * (1.0 + std::abs(xj));
    const bool at_lo = std::isfinite(lo) && std::abs(xj - lo) <= tol;
    const bool at_hi = std::isfinite(hi) && std::abs(xj - hi) <= tol;
    // reduced cost c_j - a_j'y must be >= 0 at a lower bound, <= 0 at an upper one
    Sense s = Sense::Equal;
    if (at_lo && !at_hi) s = Sense::LessEqual;
    if (at_hi && !at_lo) s = Sense::GreaterEqual;
    face_row[j] = face.add_row(s, lp.cost[j]);
  }
  for (const auto& e : lp.entries)
    if (face_row[e.col] >= 0) face.add_entry(face_row[e.col], e.row, e.value);

  detail::Engine engine(face, opt);
  if (engine.solve() != Status::Optimal)
    fail(ErrorKind::Numerical, "resolve_degenerate_duals: optimal dual face is empty");

  std::vector<int> order = rows;
  if (order.empty())
    for (int i = 0; i < m; ++i) order.push_back(i);
  const double sign = pref == DualPreference::Min ? 1.0 : -1.0;
  std::vector<double> lo(face.lower), hi(face.upper);
  for (int k : order) {
    if (lo[k] == hi[k]) continue;
    engine.set_cost(k, sign);
    const Status st = engine.reoptimize();
    if (st != Status::Optimal) fail(ErrorKind::Numerical, "resolve_degenerate_duals: face optimization failed");
    const double v = engine.value(k);
    const double slack = 1e-9 * (1.0 + std::abs(v));
    if (pref == DualPreference::Min)
      hi[k] = v + slack;
    else
      lo[k] = v - slack;
    engine.set_cost(k, 0.0);
    engine.set_bounds(k, lo[k], hi[k]);
  }
  if (engine.reoptimize() != Status::Optimal)
    fail(ErrorKind::Numerical, "resolve_degenerate_duals: face optimization failed");

  LpSolution out = sol;
  for (int i = 0; i < m; ++i) out.duals[i] = engine.value(i);
  out.reduced_costs.assign(lp.cost.begin(), lp.cost.end());
  for (const auto& e : lp.entries) out.reduced_costs[e.col] -= e.value * out.duals[e.row];
  out.certificate = certify(lp, out.x, out.duals);
  return out;
}

}  // namespace rasdm::lp
