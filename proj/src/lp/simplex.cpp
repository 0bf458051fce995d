#include <algorithm>
#include <cmath>

#include "lp/engine.hpp"
#include "rasdm/error.hpp"

namespace rasdm::lp {

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::NumericalFailure: return "numerical_failure";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

int LinearProgram::add_column(double c, double lo, double hi, std::string name) {
  cost.push_back(c);
  lower.push_back(lo);
  upper.push_back(hi);
  col_names.push_back(std::move(name));
  return num_cols() - 1;
}

int LinearProgram::add_row(Sense s, double b, std::string name) {
  sense.push_back(s);
  rhs.push_back(b);
  row_names.push_back(std::move(name));
  return num_rows() - 1;
}

void LinearProgram::check() const {
  const int n = num_cols(), m = num_rows();
  if (lower.size() != cost.size() || upper.size() != cost.size() || sense.size() != rhs.size())
    fail(ErrorKind::Invalid, "linear program: inconsistent array sizes");
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(cost[j])) fail(ErrorKind::Invalid, "linear program: non-finite cost");
    if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] > upper[j] || lower[j] == kInf ||
        upper[j] == -kInf)
      fail(ErrorKind::Invalid, "linear program: bad bounds on column " + std::to_string(j));
  }
  for (double b : rhs)
    if (!std::isfinite(b)) fail(ErrorKind::Invalid, "linear program: non-finite rhs");
  for (const auto& e : entries) {
    if (e.row < 0 || e.row >= m || e.col < 0 || e.col >= n)
      fail(ErrorKind::Invalid, "linear program: entry index out of range");
    if (!std::isfinite(e.value)) fail(ErrorKind::Invalid, "linear program: non-finite coefficient");
  }
}

namespace {

void row_bounds(Sense s, double b, double& lo, double& hi) {
  lo = s == Sense::LessEqual ? -kInf : b;
  hi = s == Sense::GreaterEqual ? kInf : b;
}

}  // namespace

namespace detail {

Engine::Engine(const LinearProgram& lp, const SolveOptions& opt) : m_(lp.num_rows()), n_(lp.num_cols()), opt_(opt) {
  // column-major copy with duplicates summed
  std::vector<Entry> sorted = lp.entries;
  std::sort(sorted.begin(), sorted.end(),
            [](const Entry& a, const Entry& b) { return a.col != b.col ? a.col < b.col : a.row < b.row; });
  start_.assign(n_ + 1, 0);
  for (std::size_t k = 0; k < sorted.size();) {
    const int c = sorted[k].col, r = sorted[k].row;
    double v = 0.0;
    while (k < sorted.size() && sorted[k].col == c && sorted[k].row == r) v += sorted[k++].value;
    if (v != 0.0) {
      index_.push_back(r);
      value_.push_back(v);
      ++start_[c + 1];
    }
  }
  for (int j = 0; j < n_; ++j) start_[j + 1] += start_[j];

  cost_.assign(n_ + m_, 0.0);
  lo_.resize(n_ + m_);
  hi_.resize(n_ + m_);
  for (int j = 0; j < n_; ++j) {
    cost_[j] = lp.cost[j];
    lo_[j] = lp.lower[j];
    hi_[j] = lp.upper[j];
  }
  for (int i = 0; i < m_; ++i) {
    row_bounds(lp.sense[i], lp.rhs[i], lo_[n_ + i], hi_[n_ + i]);
    rhs_scale_ = std::max(rhs_scale_, 1.0 + std::abs(lp.rhs[i]));
  }
  max_iterations_ = opt_.max_iterations > 0 ? opt_.max_iterations : 10000 + 50 * (m_ + n_);
  // an explicit inverse costs O(m^3) to rebuild and O(m^2) per update, so
  // large bases go longer between refactorizations
  refactor_interval_ = opt_.refactor_interval > 0 ? opt_.refactor_interval : std::max(64, m_ / 2);
}

void Engine::set_bounds(int col, double lo, double hi) {
  lo_[col] = lo;
  hi_[col] = hi;
  if (status_.empty() || status_[col] == VarStatus::Basic) return;
  place_nonbasic(col);
}

void Engine::place_nonbasic(int j) {
  if (std::isfinite(lo_[j]) && !(status_[j] == VarStatus::AtUpper && std::isfinite(hi_[j]))) {
    x_[j] = lo_[j];
    status_[j] = VarStatus::AtLower;
  } else if (std::isfinite(hi_[j])) {
    x_[j] = hi_[j];
    status_[j] = VarStatus::AtUpper;
  } else {
    x_[j] = 0.0;
    status_[j] = VarStatus::Free;
  }
}

bool Engine::refactor() {
  if (m_ == 0) return true;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(m_, m_);
  for (int r = 0; r < m_; ++r) for_column(basis_[r], [&](int i, double a) { b(i, r) = a; });
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
  if (!(lu.rcond() > 1e-14)) return false;
  binv_ = lu.inverse();
  since_refactor_ = 0;
  return true;
}

void Engine::recompute_basics() {
  if (m_ == 0) return;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(m_);
  for (int j = 0; j < total(); ++j) {
    if (status_[j] == VarStatus::Basic || x_[j] == 0.0) continue;
    const double xj = x_[j];
    for_column(j, [&](int i, double a) { v[i] += a * xj; });
  }
  Eigen::VectorXd xb = -(binv_ * v);
  for (int r = 0; r < m_; ++r) x_[basis_[r]] = xb[r];
}

double Engine::infeasibility() const {
  double s = 0.0;
  for (int j = n_ + m_; j < total(); ++j) s += std::max(0.0, x_[j]);
  return s;
}

Status Engine::iterate(const std::vector<double>& cost, bool phase_one) {
  const double otol = opt_.optimality_tol, ftol = opt_.feasibility_tol, ptol = opt_.pivot_tol;
  bool bland = false;
  int degenerate_run = 0;
  Eigen::VectorXd cb(m_), y(m_), alpha(m_);
  while (true) {
    if (iterations_ >= max_iterations_) return Status::IterationLimit;
    if (since_refactor_ >= refactor_interval_) {
      if (!refactor()) return Status::NumericalFailure;
      recompute_basics();
    }
    for (int r = 0; r < m_; ++r) cb[r] = cost[basis_[r]];
    y.noalias() = binv_.transpose() * cb;

    int q = -1;
    double best = 0.0, dq = 0.0;
    for (int j = 0; j < total(); ++j) {
      const VarStatus st = status_[j];
      if (st == VarStatus::Basic || lo_[j] == hi_[j]) continue;
      double d = cost[j];
      for_column(j, [&](int i, double a) { d -= y[i] * a; });
      const bool inc = (st == VarStatus::AtLower || st == VarStatus::Free) && d < -otol;
      const bool dec = (st == VarStatus::AtUpper || st == VarStatus::Free) && d > otol;
      if (!inc && !dec) continue;
      if (bland) {
        q = j;
        dq = d;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        q = j;
        dq = d;
      }
    }
    if (q < 0) return Status::Optimal;

    const double dir = dq < 0 ? 1.0 : -1.0;
    alpha.setZero();
    for_column(q, [&](int i, double a) { alpha.noalias() += a * binv_.col(i); });

    // Harris two-pass ratio test; plain min-ratio with index ties under Bland
    double tmax = kInf;
    for (int r = 0; r < m_; ++r) {
      if (std::abs(alpha[r]) <= ptol) continue;
      const int j = basis_[r];
      const double delta = -dir * alpha[r];
      // a basic sitting slightly outside its bound must still block at t = 0
      if (delta < 0 && std::isfinite(lo_[j])) tmax = std::min(tmax, std::max(0.0, x_[j] - lo_[j] + ftol) / -delta);
      if (delta > 0 && std::isfinite(hi_[j])) tmax = std::min(tmax, std::max(0.0, hi_[j] - x_[j] + ftol) / delta);
    }
    int leave = -1;
    double t = kInf, best_pivot = 0.0;
    for (int r = 0; r < m_; ++r) {
      if (std::abs(alpha[r]) <= ptol) continue;
      const int j = basis_[r];
      const double delta = -dir * alpha[r];
      double ratio = kInf;
      if (delta < 0 && std::isfinite(lo_[j])) ratio = std::max(0.0, (x_[j] - lo_[j]) / -delta);
      if (delta > 0 && std::isfinite(hi_[j])) ratio = std::max(0.0, (hi_[j] - x_[j]) / delta);
      if (!std::isfinite(ratio)) continue;
      if (bland) {
        if (leave < 0 || ratio < t - 1e-12 || (ratio <= t + 1e-12 && j < basis_[leave])) {
          leave = r;
          t = ratio;
        }
      } else if (ratio <= tmax && std::abs(alpha[r]) > best_pivot) {
        leave = r;
        t = ratio;
        best_pivot = std::abs(alpha[r]);
      }
    }
    const double flip = hi_[q] - lo_[q];
    if (leave < 0 && !std::isfinite(flip)) {
      // a drifted inverse can fake a ray; only trust one seen on a fresh factor
      if (since_refactor_ > 0) {
        if (!refactor()) return Status::NumericalFailure;
        recompute_basics();
        continue;
      }
      return phase_one ? Status::NumericalFailure : Status::Unbounded;
    }

    ++iterations_;
    if (std::isfinite(flip) && (leave < 0 || flip <= t)) {
      for (int r = 0; r < m_; ++r) x_[basis_[r]] -= dir * flip * alpha[r];
      if (dir > 0) {
        x_[q] = hi_[q];
        status_[q] = VarStatus::AtUpper;
      } else {
        x_[q] = lo_[q];
        status_[q] = VarStatus::AtLower;
      }
      degenerate_run = 0;
      bland = false;
      continue;
    }

    x_[q] += dir * t;
    for (int r = 0; r < m_; ++r) x_[basis_[r]] -= dir * t * alpha[r];
    const int jl = basis_[leave];
    if (-dir * alpha[leave] < 0) {
      x_[jl] = lo_[jl];
      status_[jl] = VarStatus::AtLower;
    } else {
      x_[jl] = hi_[jl];
      status_[jl] = VarStatus::AtUpper;
    }

    const double piv = alpha[leave];
    Eigen::RowVectorXd prow = binv_.row(leave) / piv;
    binv_.noalias() -= alpha * prow;
    binv_.row(leave) = prow;
    basis_[leave] = q;
    pos_[q] = leave;
    pos_[jl] = -1;
    status_[q] = VarStatus::Basic;
    ++since_refactor_;

    if (t * std::abs(dq) <= 1e-12) {
      if (++degenerate_run > opt_.degenerate_budget) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

Status Engine::phase_two() {
  std::vector<double> cost(cost_);
  cost.resize(total(), 0.0);
  for (int attempt = 0; attempt < 3; ++attempt) {
    const Status st = iterate(cost, false);
    if (st != Status::Optimal) return st;
    // a few product-form updates on a fresh factor are accurate enough; the
    // final certificate catches anything that slips through
    if (attempt > 0 || since_refactor_ >= 16)
      if (!refactor()) return Status::NumericalFailure;
    recompute_basics();
    double worst = 0.0;
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      worst = std::max({worst, lo_[j] - x_[j], x_[j] - hi_[j]});
    }
    if (worst <= 1e-9 * rhs_scale_) return Status::Optimal;
  }
  return Status::NumericalFailure;
}

Status Engine::solve() {
  const int base = n_ + m_;
  art_row_.clear();
  art_sign_.clear();
  x_.assign(base, 0.0);
  status_.assign(base, VarStatus::AtLower);
  lo_.resize(base);
  hi_.resize(base);
  cost_.resize(base);
  iterations_ = 0;

  for (int j = 0; j < n_; ++j) place_nonbasic(j);
  std::vector<double> act(m_, 0.0);
  for (int j = 0; j < n_; ++j)
    if (x_[j] != 0.0) for_column(j, [&](int i, double a) { act[i] += a * x_[j]; });

  basis_.assign(m_, -1);
  std::vector<double> diag(m_, -1.0);
  for (int i = 0; i < m_; ++i) {
    const int s = n_ + i;
    const double target = std::clamp(act[i], lo_[s], hi_[s]);
    if (std::abs(target - act[i]) <= opt_.feasibility_tol) {
      basis_[i] = s;
      x_[s] = act[i];
      status_[s] = VarStatus::Basic;
      continue;
    }
    x_[s] = target;
    status_[s] = target == lo_[s] ? VarStatus::AtLower : VarStatus::AtUpper;
    const double sign = target > act[i] ? 1.0 : -1.0;
    art_row_.push_back(i);
    art_sign_.push_back(sign);
    lo_.push_back(0.0);
    hi_.push_back(kInf);
    cost_.push_back(0.0);
    x_.push_back(std::abs(target - act[i]));
    status_.push_back(VarStatus::Basic);
    basis_[i] = total() - 1;
    diag[i] = sign;
  }
  pos_.assign(total(), -1);
  for (int r = 0; r < m_; ++r) pos_[basis_[r]] = r;
  binv_ = Eigen::MatrixXd::Zero(m_, m_);
  for (int i = 0; i < m_; ++i) binv_(i, i) = 1.0 / diag[i];
  since_refactor_ = 0;
  return phases();
}

Status Engine::solve_from(const Basis& start) {
  const int base = n_ + m_;
  if (static_cast<int>(start.columns.size()) != n_ || static_cast<int>(start.rows.size()) > m_) return solve();
  art_row_.clear();
  art_sign_.clear();
  x_.assign(base, 0.0);
  status_.assign(base, VarStatus::AtLower);
  lo_.resize(base);
  hi_.resize(base);
  cost_.resize(base);
  iterations_ = 0;

  // rows added since the basis was taken enter with their logical basic
  for (int j = 0; j < base; ++j) {
    const int i = j - n_;
    status_[j] = j < n_ ? start.columns[j] : i < static_cast<int>(start.rows.size()) ? start.rows[i] : VarStatus::Basic;
  }
  basis_.clear();
  for (int j = 0; j < base; ++j) {
    if (status_[j] == VarStatus::Basic) {
      basis_.push_back(j);
      continue;
    }
    const VarStatus want = status_[j];
    place_nonbasic(j);
    if (want == VarStatus::AtUpper && std::isfinite(hi_[j])) {
      x_[j] = hi_[j];
      status_[j] = VarStatus::AtUpper;
    }
  }
  if (static_cast<int>(basis_.size()) != m_) return solve();
  pos_.assign(base, -1);
  for (int r = 0; r < m_; ++r) pos_[basis_[r]] = r;
  if (!refactor()) return solve();
  recompute_basics();

  // a logical outside its bounds is parked on the bound and an artificial
  // takes its basis slot; any other infeasible basic means a cold start
  const double ftol = opt_.feasibility_tol;
  for (int r = 0; r < m_; ++r) {
    const int j = basis_[r];
    if (x_[j] >= lo_[j] - ftol && x_[j] <= hi_[j] + ftol) continue;
    if (j < n_) return solve();
    const double act = x_[j];
    const double target = std::clamp(act, lo_[j], hi_[j]);
    const double sign = target > act ? 1.0 : -1.0;
    x_[j] = target;
    status_[j] = target == lo_[j] ? VarStatus::AtLower : VarStatus::AtUpper;
    pos_[j] = -1;
    art_row_.push_back(j - n_);
    art_sign_.push_back(sign);
    lo_.push_back(0.0);
    hi_.push_back(kInf);
    cost_.push_back(0.0);
    x_.push_back(std::abs(target - act));
    status_.push_back(VarStatus::Basic);
    basis_[r] = total() - 1;
    pos_.push_back(r);
    // column -e_i became sign*e_i
    binv_.row(r) *= -sign;
  }
  return phases();
}

Status Engine::phases() {
  const int base = n_ + m_;
  if (!art_row_.empty()) {
    std::vector<double> c1(total(), 0.0);
    for (int j = base; j < total(); ++j) c1[j] = 1.0;
    const Status st = iterate(c1, true);
    if (st != Status::Optimal) return st == Status::IterationLimit ? st : Status::NumericalFailure;
    if (!refactor()) return Status::NumericalFailure;
    recompute_basics();
    if (infeasibility() > 1e-8 * rhs_scale_) return Status::Infeasible;
    for (int j = base; j < total(); ++j) {
      hi_[j] = 0.0;
      if (status_[j] != VarStatus::Basic) {
        x_[j] = 0.0;
        status_[j] = VarStatus::AtLower;
      }
    }
  }
  return phase_two();
}

Status Engine::reoptimize() {
  if (status_.empty()) return solve();
  recompute_basics();
  for (int r = 0; r < m_; ++r) {
    const int j = basis_[r];
    if (x_[j] < lo_[j] - opt_.feasibility_tol || x_[j] > hi_[j] + opt_.feasibility_tol) return solve();
  }
  return phase_two();
}

LpSolution Engine::extract(const LinearProgram& lp, Status status) const {
  LpSolution s;
  s.status = status;
  s.iterations = iterations_;
  s.x.assign(x_.begin(), x_.begin() + n_);
  s.basis.columns.assign(status_.begin(), status_.begin() + n_);
  s.basis.rows.assign(status_.begin() + n_, status_.begin() + n_ + m_);
  s.row_activity.assign(m_, 0.0);
  for (int j = 0; j < n_; ++j)
    for (int k = start_[j]; k < start_[j + 1]; ++k) s.row_activity[index_[k]] += value_[k] * s.x[j];
  s.objective = lp.objective_offset;
  for (int j = 0; j < n_; ++j) s.objective += lp.cost[j] * s.x[j];
  s.duals.assign(m_, 0.0);
  s.reduced_costs.assign(lp.cost.begin(), lp.cost.end());
  if (status != Status::Optimal || m_ == 0) return s;
  Eigen::VectorXd cb(m_);
  for (int r = 0; r < m_; ++r) cb[r] = basis_[r] < n_ ? lp.cost[basis_[r]] : 0.0;
  Eigen::VectorXd y = binv_.transpose() * cb;
  for (int i = 0; i < m_; ++i) s.duals[i] = y[i];
  for (int j = 0; j < n_; ++j)
    for (int k = start_[j]; k < start_[j + 1]; ++k) s.reduced_costs[j] -= y[index_[k]] * value_[k];
  return s;
}

}  // namespace detail

Certificate certify(const LinearProgram& lp, const std::vector<double>& x, const std::vector<double>& y) {
  const int n = lp.num_cols(), m = lp.num_rows();
  std::vector<double> act(m, 0.0), d(lp.cost);
  for (const auto& e : lp.entries) {
    act[e.row] += e.value * x[e.col];
    d[e.col] -= e.value * y[e.row];
  }
  Certificate c;
  double primal = lp.objective_offset, dual = lp.objective_offset;
  auto account = [&](double xv, double dv, double lo, double hi) {
    c.primal_residual = std::max({c.primal_residual, lo - xv, xv - hi});
    if (dv > 0) {
      if (std::isfinite(lo)) {
        c.complementarity = std::max(c.complementarity, dv * (xv - lo));
        dual += dv * lo;
      } else {
        c.dual_residual = std::max(c.dual_residual, dv);
      }
    } else if (dv < 0) {
      if (std::isfinite(hi)) {
        c.complementarity = std::max(c.complementarity, -dv * (hi - xv));
        dual += dv * hi;
      } else {
        c.dual_residual = std::max(c.dual_residual, -dv);
      }
    }
  };
  for (int j = 0; j < n; ++j) {
    primal += lp.cost[j] * x[j];
    account(x[j], d[j], lp.lower[j], lp.upper[j]);
  }
  for (int i = 0; i < m; ++i) {
    double lo, hi;
    row_bounds(lp.sense[i], lp.rhs[i], lo, hi);
    account(act[i], y[i], lo, hi);
  }
  c.dual_objective = dual;
  c.duality_gap = std::abs(primal - dual);
  return c;
}

namespace {

LpSolution finish(const LinearProgram& lp, const SolveOptions& opt, const detail::Engine& engine, Status st);

}  // namespace

LpSolution solve(const LinearProgram& lp, const SolveOptions& opt) {
  lp.check();
  detail::Engine engine(lp, opt);
  return finish(lp, opt, engine, engine.solve());
}

LpSolution solve(const LinearProgram& lp, const Basis& start, const SolveOptions& opt) {
  lp.check();
  detail::Engine engine(lp, opt);
  return finish(lp, opt, engine, engine.solve_from(start));
}

namespace {

LpSolution finish(const LinearProgram& lp, const SolveOptions& opt, const detail::Engine& engine, Status st) {
  LpSolution sol = engine.extract(lp, st);
  if (st != Status::Optimal) return sol;
  sol.certificate = certify(lp, sol.x, sol.duals);
  double bscale = 1.0, cscale = 1.0;
  for (double b : lp.rhs) bscale = std::max(bscale, 1.0 + std::abs(b));
  for (double c : lp.cost) cscale = std::max(cscale, 1.0 + std::abs(c));
  const double oscale = 1.0 + std::abs(sol.objective);
  const auto& c = sol.certificate;
  if (c.primal_residual > opt.certify_tol * bscale || c.dual_residual > opt.certify_tol * cscale ||
      c.complementarity > opt.certify_tol * oscale || c.duality_gap > opt.certify_tol * oscale)
    sol.status = Status::NumericalFailure;
  return sol;
}

}  // namespace

bool primal_degenerate(const LinearProgram& lp, const LpSolution& sol, double tol) {
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (sol.basis.columns[j] != VarStatus::Basic) continue;
    const double t = tol * (1.0 + std::abs(sol.x[j]));
    if (std::abs(sol.x[j] - lp.lower[j]) <= t || std::abs(sol.x[j] - lp.upper[j]) <= t) return true;
  }
  for (int i = 0; i < lp.num_rows(); ++i) {
    if (sol.basis.rows[i] != VarStatus::Basic) continue;
    if (std::abs(sol.row_activity[i] - lp.rhs[i]) <= tol * (1.0 + std::abs(lp.rhs[i]))) return true;
  }
  // an artificial left in the basis also means a degenerate vertex
  int basic = 0;
  for (auto s : sol.basis.columns) basic += s == VarStatus::Basic;
  for (auto s : sol.basis.rows) basic += s == VarStatus::Basic;
  return basic < lp.num_rows();
}

}  // namespace rasdm::lp
