#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rasdm/lp.hpp"

namespace rasdm::lp::detail {

// Bounded-variable revised primal simplex on [A -I] z = 0 with a dense basis
// inverse.  Variables: n structural, m logical (one per row), then any
// artificials added by phase one.
class Engine {
 public:
  Engine(const LinearProgram& lp, const SolveOptions& opt);

  Status solve();       // phase one from the logical basis, then phase two
  Status reoptimize();  // phase two from the current basis; falls back to solve()
  // warm start; rows beyond start.rows begin with their logical basic
  Status solve_from(const Basis& start);

  void set_cost(int col, double c) { cost_[col] = c; }
  void set_bounds(int col, double lo, double hi);
  double value(int col) const { return x_[col]; }
  int iterations() const { return iterations_; }

  LpSolution extract(const LinearProgram& lp, Status status) const;

 private:
  template <class F>
  void for_column(int j, F&& f) const {
    if (j < n_) {
      for (int k = start_[j]; k < start_[j + 1]; ++k) f(index_[k], value_[k]);
    } else if (j < n_ + m_) {
      f(j - n_, -1.0);
    } else {
      f(art_row_[j - n_ - m_], art_sign_[j - n_ - m_]);
    }
  }

  int total() const { return n_ + m_ + static_cast<int>(art_row_.size()); }
  bool refactor();
  void recompute_basics();
  double infeasibility() const;
  Status iterate(const std::vector<double>& cost, bool phase_one);
  Status phase_two();
  Status phases();  // phase one if artificials are present, then phase two
  void place_nonbasic(int j);

  int m_, n_;
  SolveOptions opt_;
  std::vector<int> start_, index_;
  std::vector<double> value_;
  std::vector<int> art_row_;
  std::vector<double> art_sign_;
  std::vector<double> cost_, lo_, hi_, x_;
  std::vector<VarStatus> status_;
  std::vector<int> basis_;  // basic variable per position
  std::vector<int> pos_;    // position in basis or -1
  Eigen::MatrixXd binv_;
  int iterations_ = 0;
  int since_refactor_ = 0;
  int max_iterations_;
  int refactor_interval_ = 64;
  double rhs_scale_ = 1.0;
};

}  // namespace rasdm::lp::detail
