#include <cmath>
#include <random>
#include <sstream>

#include <fstream>

#include "doctest.h"
#include "json.hpp"
#include "rasdm/lp.hpp"

using namespace rasdm::lp;

namespace {

// M1 recourse: one generator c=10, r_u=3, r_v=1, G=100 at pre-commitment x
LinearProgram m1_recourse(double x, double demand) {
  LinearProgram lp;
  const int X = lp.add_column(10.0, 0.0, 100.0, "X");
  const int U = lp.add_column(3.0, 0.0, kInf, "U");
  const int V = lp.add_column(1.0, 0.0, kInf, "V");
  const int bal = lp.add_row(Sense::GreaterEqual, demand, "balance");
  lp.add_entry(bal, X, 1.0);
  const int na = lp.add_row(Sense::Equal, x, "precommit");
  lp.add_entry(na, X, 1.0);
  lp.add_entry(na, U, -1.0);
  lp.add_entry(na, V, 1.0);
  return lp;
}

}  // namespace

TEST_CASE("single bound row has unit dual") {
  LinearProgram lp;
  int x = lp.add_column(1.0, -kInf, kInf);
  int r = lp.add_row(Sense::GreaterEqual, 3.0);
  lp.add_entry(r, x, 1.0);
  auto s = solve(lp);
  REQUIRE(s.optimal());
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.duals[0] == doctest::Approx(1.0));
}

TEST_CASE("ramp-up recourse prices at cost plus up-ramp") {
  auto lp = m1_recourse(40, 50);
  auto s = solve(lp);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(530.0));
  CHECK(s.duals[0] == doctest::Approx(13.0));
  CHECK(s.duals[1] == doctest::Approx(-3.0));
}

TEST_CASE("contradictory bounds are infeasible") {
  LinearProgram lp;
  int x = lp.add_column(0.0, -kInf, kInf);
  int a = lp.add_row(Sense::LessEqual, 0.0);
  int b = lp.add_row(Sense::GreaterEqual, 1.0);
  lp.add_entry(a, x, 1.0);
  lp.add_entry(b, x, 1.0);
  CHECK(solve(lp).status == Status::Infeasible);
}

TEST_CASE("unbounded direction is reported") {
  LinearProgram lp;
  int x = lp.add_column(-1.0, 0.0, kInf);
  int r = lp.add_row(Sense::GreaterEqual, 1.0);
  lp.add_entry(r, x, 1.0);
  CHECK(solve(lp).status == Status::Unbounded);
}

TEST_CASE("degenerate balance price picks an endpoint by preference") {
  auto lp = m1_recourse(40, 40);
  auto s = solve(lp);
  REQUIRE(s.optimal());
  auto lo = resolve_degenerate_duals(lp, s, DualPreference::Min, {0});
  auto hi = resolve_degenerate_duals(lp, s, DualPreference::Max, {0});
  CHECK(lo.duals[0] == doctest::Approx(9.0));
  CHECK(hi.duals[0] == doctest::Approx(13.0));
  auto again = resolve_degenerate_duals(lp, lo, DualPreference::Min, {0});
  CHECK(again.duals == lo.duals);
  CHECK(lo.certificate.duality_gap < 1e-9);
}

TEST_CASE("nondegenerate duals are left alone") {
  auto lp = m1_recourse(40, 50);
  auto s = solve(lp);
  auto r = resolve_degenerate_duals(lp, s);
  CHECK(r.duals == s.duals);
}

TEST_CASE("dual signs follow row sense on random feasible programs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    LinearProgram lp;
    const int n = 2 + trial % 9, m = 1 + trial % 7;
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
      x0[j] = 2.0 * u(rng);
      double lo = trial % 3 == 0 ? -kInf : -3.0, hi = trial % 4 == 0 ? kInf : 3.0;
      lp.add_column(u(rng), lo, hi);
    }
    for (int i = 0; i < m; ++i) {
      double act = 0.0;
      std::vector<double> a(n);
      for (int j = 0; j < n; ++j) {
        a[j] = std::round(4.0 * u(rng));
        act += a[j] * x0[j];
      }
      const Sense s = static_cast<Sense>((trial + i) % 3);
      double b = s == Sense::Equal ? act : s == Sense::LessEqual ? act + 0.5 : act - 0.5;
      int r = lp.add_row(s, b);
      for (int j = 0; j < n; ++j)
        if (a[j] != 0.0) lp.add_entry(r, j, a[j]);
    }
    auto sol = solve(lp);
    if (sol.status == Status::Unbounded) continue;
    REQUIRE(sol.optimal());
    ++solved;
    for (int i = 0; i < m; ++i) {
      if (lp.sense[i] == Sense::GreaterEqual) CHECK(sol.duals[i] >= -1e-9);
      if (lp.sense[i] == Sense::LessEqual) CHECK(sol.duals[i] <= 1e-9);
    }
    CHECK(sol.certificate.duality_gap <= 1e-8 * (1 + std::abs(sol.objective)));
    auto again = solve(lp);
    CHECK(again.x == sol.x);
    CHECK(again.duals == sol.duals);
  }
  CHECK(solved > 50);
}

TEST_CASE("mps dump uses fixed columns") {
  auto lp = m1_recourse(40, 50);
  std::ostringstream os;
  write_mps(lp, os);
  const std::string s = os.str();
  CHECK(s.find("ROWS") != std::string::npos);
  CHECK(s.find(" G  R0000000") != std::string::npos);
  CHECK(s.find("    C0000000  COST      10") != std::string::npos);
  CHECK(s.find("ENDATA") != std::string::npos);
}

TEST_CASE("objectives match the frozen HiGHS oracle") {
  std::ifstream in(FIXTURE_DIR "/lp_oracle.json");
  REQUIRE(in.good());
  const auto doc = nlohmann::json::parse(in);
  int checked = 0;
  for (const auto& c : doc["cases"]) {
    LinearProgram lp;
    const auto& cost = c["cost"];
    for (std::size_t j = 0; j < cost.size(); ++j) {
      const double lo = c["lower"][j].is_null() ? -kInf : c["lower"][j].get<double>();
      const double hi = c["upper"][j].is_null() ? kInf : c["upper"][j].get<double>();
      lp.add_column(cost[j].get<double>(), lo, hi);
    }
    for (const auto& row : c["rows"]) {
      const int r = lp.add_row(static_cast<Sense>(row["sense"].get<int>()), row["rhs"].get<double>());
      for (const auto& e : row["coef"]) lp.add_entry(r, e[0].get<int>(), e[1].get<double>());
    }
    const auto sol = solve(lp);
    const std::string expect = c["status"];
    CHECK(std::string(to_string(sol.status)) == expect);
    if (expect == "optimal" && sol.optimal())
      CHECK(sol.objective == doctest::Approx(c["objective"].get<double>()).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked == 120);
}

TEST_CASE("warm start after appending rows matches a cold solve") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int warm = 0;
  for (int trial = 0; trial < 100; ++trial) {
    LinearProgram lp;
    const int n = 3 + trial % 6;
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
      x0[j] = 2.0 * u(rng);
      lp.add_column(u(rng), -3.0, 3.0);
    }
    auto add_cut = [&](double slack) {
      const int r = lp.add_row(Sense::GreaterEqual, 0.0);
      double act = 0.0;
      for (int j = 0; j < n; ++j) {
        const double a = std::round(4.0 * u(rng));
        if (a != 0.0) lp.add_entry(r, j, a);
        act += a * x0[j];
      }
      lp.rhs[r] = act - slack;
    };
    for (int i = 0; i < 2; ++i) add_cut(0.5);
    const auto first = solve(lp);
    REQUIRE(first.optimal());
    // cuts through the old optimum make its basis infeasible
    for (int i = 0; i < 3; ++i) add_cut(0.0);
    const auto cold = solve(lp);
    const auto hot = solve(lp, first.basis);
    REQUIRE(cold.optimal());
    REQUIRE(hot.optimal());
    CHECK(hot.objective == doctest::Approx(cold.objective).epsilon(1e-9));
    warm += hot.iterations <= cold.iterations;
  }
  CHECK(warm > 50);
}
