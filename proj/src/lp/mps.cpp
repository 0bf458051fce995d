#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "rasdm/lp.hpp"

namespace rasdm::lp {

namespace {

// fixed MPS gives numbers a 12-character field
std::string num(double v) {
  char buf[32];
  for (int digits = 12; digits > 1; --digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::string(buf).size() <= 12) break;
  }
  return buf;
}

std::string field(const std::string& s, std::size_t width) {
  std::string out = s.substr(0, width);
  out.resize(width, ' ');
  return out;
}

std::string row_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "R%07d", i);
  return buf;
}

std::string col_name(int j) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "C%07d", j);
  return buf;
}

void line(std::ostream& out, const std::string& f1, const std::string& f2, const std::string& f3,
          const std::string& f4, const std::string& f5 = {}, const std::string& f6 = {}) {
  std::string s = " " + field(f1, 2) + " " + field(f2, 8) + "  " + field(f3, 8) + "  " + field(f4, 12);
  if (!f5.empty()) s += "   " + field(f5, 8) + "  " + field(f6, 12);
  while (!s.empty() && s.back() == ' ') s.pop_back();
  out << s << '\n';
}

}  // namespace

void write_mps(const LinearProgram& lp, std::ostream& out, const std::string& name) {
  out << "NAME          " << name.substr(0, 8) << '\n';
  out << "ROWS\n";
  out << " N  COST\n";
  for (int i = 0; i < lp.num_rows(); ++i) {
    const char* t = lp.sense[i] == Sense::LessEqual ? "L" : lp.sense[i] == Sense::GreaterEqual ? "G" : "E";
    out << " " << t << "  " << row_name(i) << '\n';
  }
  std::vector<std::map<int, double>> cols(lp.num_cols());
  for (const auto& e : lp.entries) cols[e.col][e.row] += e.value;
  out << "COLUMNS\n";
  for (int j = 0; j < lp.num_cols(); ++j) {
    if (lp.cost[j] != 0.0) line(out, "", col_name(j), "COST", num(lp.cost[j]));
    for (const auto& [r, v] : cols[j])
      if (v != 0.0) line(out, "", col_name(j), row_name(r), num(v));
  }
  out << "RHS\n";
  for (int i = 0; i < lp.num_rows(); ++i)
    if (lp.rhs[i] != 0.0) line(out, "", "RHS", row_name(i), num(lp.rhs[i]));
  if (lp.objective_offset != 0.0) line(out, "", "RHS", "COST", num(-lp.objective_offset));
  out << "BOUNDS\n";
  for (int j = 0; j < lp.num_cols(); ++j) {
    const double lo = lp.lower[j], hi = lp.upper[j];
    const std::string c = col_name(j);
    if (lo == hi) {
      line(out, "FX", "BND", c, num(lo));
      continue;
    }
    if (!std::isfinite(lo) && !std::isfinite(hi)) {
      line(out, "FR", "BND", c, "");
      continue;
    }
    if (!std::isfinite(lo))
      line(out, "MI", "BND", c, "");
    else if (lo != 0.0)
      line(out, "LO", "BND", c, num(lo));
    if (std::isfinite(hi)) line(out, "UP", "BND", c, num(hi));
  }
  out << "ENDATA\n";
}

}  // namespace rasdm::lp
