#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace rasdm::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure, IterationLimit };
enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, Free };
enum class DualPreference { Min, Max };

const char* to_string(Status s);

struct Entry {
  int row;
  int col;
  double value;
};

// min c'x + offset  s.t.  row senses against rhs, lower <= x <= upper
struct LinearProgram {
  std::vector<double> cost, lower, upper;
  std::vector<std::string> col_names;
  std::vector<Sense> sense;
  std::vector<double> rhs;
  std::vector<std::string> row_names;
  std::vector<Entry> entries;
  double objective_offset = 0.0;

  int add_column(double c, double lo, double hi, std::string name = {});
  int add_row(Sense s, double b, std::string name = {});
  void add_entry(int row, int col, double value) { entries.push_back({row, col, value}); }

  int num_cols() const { return static_cast<int>(cost.size()); }
  int num_rows() const { return static_cast<int>(rhs.size()); }

  // throws Error(Invalid) on bad indices, NaN or crossed bounds
  void check() const;
};

struct Basis {
  std::vector<VarStatus> columns;
  std::vector<VarStatus> rows;  // status of each row's logical variable
};

// residuals of a primal/dual pair, independent of any basis
struct Certificate {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
  double duality_gap = 0.0;
  double dual_objective = 0.0;
};

struct LpSolution {
  Status status = Status::NumericalFailure;
  std::vector<double> x;
  std::vector<double> row_activity;
  std::vector<double> duals;  // >= rows: >= 0, <= rows: <= 0
  std::vector<double> reduced_costs;
  double objective = 0.0;
  Basis basis;
  Certificate certificate;
  int iterations = 0;

  bool optimal() const { return status == Status::Optimal; }
};

struct SolveOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-7;
  double certify_tol = 1e-8;
  int max_iterations = 0;  // 0: derived from problem size
  int degenerate_budget = 50;
  int refactor_interval = 0;  // 0: derived from the row count
};

LpSolution solve(const LinearProgram& lp, const SolveOptions& opt = {});
// warm start from an earlier basis of the same program with rows appended since
LpSolution solve(const LinearProgram& lp, const Basis& start, const SolveOptions& opt = {});

Certificate certify(const LinearProgram& lp, const std::vector<double>& x, const std::vector<double>& duals);

// Picks, among all optimal duals of an optimal solution, the lexicographically
// smallest (or largest) vector over the listed rows.  Empty list = all rows.
LpSolution resolve_degenerate_duals(const LinearProgram& lp, const LpSolution& sol,
                                    DualPreference pref = DualPreference::Min,
                                    const std::vector<int>& rows = {}, const SolveOptions& opt = {});

// true when some basic variable sits on a bound, i.e. the duals may not be unique
bool primal_degenerate(const LinearProgram& lp, const LpSolution& sol, double tol = 1e-9);

void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name = "RASDM");

}  // namespace rasdm::lp
