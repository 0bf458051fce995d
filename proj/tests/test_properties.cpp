#include <cmath>
#include <random>

#include "doctest.h"
#include "rasdm/error.hpp"
#include "rasdm/io.hpp"
#include "rasdm/properties.hpp"
#include "rasdm/random_instance.hpp"

using namespace rasdm;

namespace {

MarketInstance load(const std::string& name) { return parse_instance_text(read_file(std::string(FIXTURE_DIR) + "/" + name)); }

const PropertyCheck* find(const std::vector<PropertyReport>& reps, const std::string& name) {
  for (const auto& r : reps)
    for (const auto& c : r.checks)
      if (c.name == name) return &c;
  return nullptr;
}

}  // namespace

TEST_CASE("single-node suites pass") {
  const auto m1 = load("m1.json");
  for (const std::string suite : {"monotonicity", "corollary2"}) {
    const auto reps = check_properties(m1, suite);
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].suite == suite);
    CHECK(reps[0].passed());
    for (const auto& c : reps[0].checks) CHECK(c.trials > 0);
  }
  CHECK(find(check_properties(m1, "corollary2"), "price_jump_magnitude")->trials > 0);
}

TEST_CASE("every fixture passes every suite") {
  for (const char* f : {"m1.json", "m1_risk.json", "two_node.json", "six_node.json", "duopoly.json"}) {
    const auto reps = check_properties(load(f), "all");
    CHECK(reps.size() == property_suites().size() - 1);
    for (const auto& r : reps) {
      INFO(f << " " << r.suite);
      CHECK(r.passed());
    }
  }
}

TEST_CASE("unknown suite lists the available ones") {
  try {
    check_properties(load("m1.json"), "nope");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Invalid);
    CHECK(std::string(e.what()).find("monotonicity") != std::string::npos);
  }
}

TEST_CASE("monotone duals through the property helpers") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 25; ++t) {
    const auto inst = random_instance(rng);
    std::vector<double> x, xh;
    for (std::size_t i = 0; i < inst.generators.size(); ++i) {
      x.push_back(std::round(u(rng) * inst.max_capacity(static_cast<int>(i))));
      xh.push_back(std::round(u(rng) * inst.max_capacity(static_cast<int>(i))));
    }
    CHECK(monotone_rho_residual(inst, x, xh) >= -1e-8);
    CHECK(monotone_rho_residual(inst, x, x) == doctest::Approx(0.0));
    const std::vector<double> extra(inst.network.nodes.size(), 5.0);
    CHECK(monotone_price_residual(inst, x, 0, extra) >= -1e-8);
  }
}

TEST_CASE("price jumps on the single-node example") {
  const auto m1 = load("m1.json");
  const std::vector<double> x40{40.0};
  Corollary2Tally tally;
  // 40 -> 20 moves the D = 30 scenario from backing down to ramping up
  probe_corollary2(m1, x40, 0, -20.0, 1e-8, tally);
  CHECK(tally.probes == 5);
  CHECK(tally.applicable >= 1);
  CHECK(tally.magnitude_violations == 0);
  CHECK(tally.sign_violations == 0);
}

TEST_CASE("expected-profit bounds hold with equality when F(x*) hits the quantile") {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 60; ++t) {
    const auto mode = t % 2 ? TradingMode::WithTrading : TradingMode::NoTrading;
    const auto c = random_profit_bound_case(rng, mode);
    CHECK(std::abs(c.atom_excess) <= 1e-12);
    CHECK(c.holds);
    // derived by hand: realized profit is x*(r_u - (r_u + r_v) q), which is the bound itself
    const auto& g = c.inst.generators[0];
    const double hand = c.x_star * (g.ramp_up - (g.ramp_up + g.ramp_down) * c.quantile);
    CHECK(c.expected_profit == doctest::Approx(hand).epsilon(1e-9).scale(1.0));
    CHECK(c.expected_profit == doctest::Approx(c.bound).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("an atom past the quantile can break the bound") {
  const auto c = atom_counter_case();
  CHECK(c.x_star == 30.0);
  CHECK(c.atom_excess == doctest::Approx(0.1));
  // prices 9, 9, 9, 13, 13 with the low price at D = x*: 30 * (3 - 4 * 0.6) = 18
  CHECK(c.expected_profit == doctest::Approx(18.0));
  CHECK(c.bound == doctest::Approx(30.0));
  CHECK_FALSE(c.holds);
  // the high price at D = x* adds 0.2 * 4 * 30
  const auto hi = evaluate_profit_bound(c.inst, c.spec, c.mode, lp::DualPreference::Max);
  CHECK(hi.expected_profit == doctest::Approx(42.0));
  CHECK(hi.holds);
  CHECK_THROWS_AS(evaluate_profit_bound(load("two_node.json"), c.spec, c.mode), Error);
}
