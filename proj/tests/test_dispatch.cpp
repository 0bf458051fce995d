#include <cmath>
#include <random>

#include "doctest.h"
#include "rasdm/dispatch.hpp"
#include "rasdm/error.hpp"
#include "rasdm/io.hpp"
#include "rasdm/random_instance.hpp"

using namespace rasdm;

namespace {

MarketInstance load(const std::string& name) { return parse_instance_text(read_file(std::string(FIXTURE_DIR) + "/" + name)); }

const std::vector<double> x40{40.0};

}  // namespace

TEST_CASE("single-node stochastic dispatch") {
  const auto inst = load("m1.json");
  const auto sol = solve_slp(inst);
  CHECK(sol.x[0] == doctest::Approx(40.0));
  CHECK(sol.objective == doctest::Approx(318.0).epsilon(1e-12));
  for (std::size_t w = 0; w < 5; ++w) {
    const auto& d = sol.scenarios[w];
    const double demand = inst.scenarios[w].demand[0];
    CHECK(d.X[0] == doctest::Approx(demand));
    // up-ramp above x, down-ramp below; at D = x the stage-one face needs
    // sum P rho = 0 (0.6*1 + 0.2*rho - 0.2*3), so rho = 0 and lambda = c
    const double expect = demand > 40 ? 13.0 : demand < 40 ? 9.0 : 10.0;
    CHECK(d.lambda[0] == doctest::Approx(expect));
    CHECK(d.rho[0] >= -3.0 - 1e-9);
    CHECK(d.rho[0] <= 1.0 + 1e-9);
  }
}

TEST_CASE("zero demand commits nothing") {
  const auto sol = solve_slp(load("zero_demand.json"));
  CHECK(sol.x[0] == 0.0);
  CHECK(sol.objective == 0.0);
}

TEST_CASE("six-node risk-neutral pre-commitment") {
  const auto inst = load("six_node.json");
  const auto sol = solve_slp(inst);
  CHECK(committed_total(inst, sol.x) == doctest::Approx(154.0).epsilon(1.0 / 154.0));
  CHECK(sol.objective == doctest::Approx(6867.0).epsilon(1e-9));
  // an alternative optimum from the other dual preference must cost the same
  DispatchOptions alt;
  alt.preference = lp::DualPreference::Max;
  CHECK(solve_slp(inst, alt).objective == doctest::Approx(sol.objective).epsilon(1e-12));
}

TEST_CASE("recourse prices and deviations") {
  const auto inst = load("m1.json");
  auto d = solve_recourse(inst, x40, 4);
  CHECK(d.X[0] == doctest::Approx(50.0));
  CHECK(d.U[0] == doctest::Approx(10.0));
  CHECK(d.cost == doctest::Approx(530.0));
  CHECK(d.lambda[0] == doctest::Approx(13.0));
  CHECK(d.rho[0] == doctest::Approx(-3.0));

  d = solve_recourse(inst, x40, 2);
  CHECK(d.X[0] == doctest::Approx(30.0));
  CHECK(d.V[0] == doctest::Approx(10.0));
  CHECK(d.lambda[0] == doctest::Approx(9.0));
  CHECK(d.rho[0] == doctest::Approx(1.0));

  d = solve_recourse(inst, x40, 3);
  CHECK(d.lambda[0] == doctest::Approx(9.0));
  CHECK(solve_recourse(inst, x40, 3, lp::DualPreference::Max).lambda[0] == doctest::Approx(13.0));

  const auto zero = load("zero_demand.json");
  d = solve_recourse(zero, std::vector<double>{0.0}, 0);
  CHECK(d.X[0] == 0.0);
  CHECK(d.cost == 0.0);

  CHECK_THROWS_AS(solve_recourse(inst, std::vector<double>{-1.0}, 0), Error);
  CHECK_THROWS_AS(solve_recourse(inst, x40, 9), Error);
}

TEST_CASE("settlement") {
  const auto inst = load("m1.json");
  const auto d = solve_recourse(inst, x40, 4);
  const auto s = settle(inst, d, 4);
  CHECK(s.generator_payment[0] == doctest::Approx(650.0));
  CHECK(s.consumer_charge[0] == doctest::Approx(650.0));
  CHECK(s.iso_net == doctest::Approx(0.0));

  const auto zero = load("zero_demand.json");
  const auto z = settle(zero, solve_recourse(zero, std::vector<double>{0.0}, 1), 1);
  CHECK(z.generator_payment[0] == 0.0);
  CHECK(z.iso_net == 0.0);
}

TEST_CASE("six-node congested scenario pays a congestion rent") {
  const auto inst = load("six_node.json");
  const auto sol = solve_slp(inst);
  // high wind behind the A-B limit congests it; with both farms at 90 the surplus spills instead
  const int w = inst.scenario_index("w90_30");
  const auto s = settle(inst, sol.scenarios[w], w);
  CHECK(s.iso_net >= 0.0);
  CHECK(s.congestion_rent > 1.0);
  CHECK(s.iso_net == doctest::Approx(s.congestion_rent));
  for (std::size_t v = 0; v < inst.scenarios.size(); ++v) CHECK(settle(inst, sol.scenarios[v], static_cast<int>(v)).iso_net >= -1e-6);
}

TEST_CASE("generator profit") {
  const auto inst = load("m1.json");
  CHECK(generator_profit(inst, solve_recourse(inst, x40, 4), 0) == doctest::Approx(120.0));
  CHECK(generator_profit(inst, solve_recourse(inst, x40, 2), 0) == doctest::Approx(-40.0));
  const auto two = load("two_node.json");
  // the expensive unit sits idle when the cheap one can cover demand
  const auto d = solve_recourse(two, std::vector<double>{120.0, 0.0}, 0);
  CHECK(d.X[1] == 0.0);
  CHECK(generator_profit(two, d, 1) == 0.0);
}

TEST_CASE("price sensitivity") {
  const auto inst = load("m1.json");
  auto probes = price_sensitivity(inst, x40, -20.0, 0);
  CHECK(probes[2].applicable);
  CHECK(probes[2].d_lambda == doctest::Approx(4.0));
  probes = price_sensitivity(inst, x40, 1.0, 0);
  CHECK(probes[2].applicable);
  CHECK(probes[2].d_lambda == 0.0);
  probes = price_sensitivity(inst, x40, 0.0, 0);
  for (const auto& p : probes) CHECK(p.d_lambda == 0.0);
  // D = 40 sits exactly at x: not deviating
  CHECK_FALSE(price_sensitivity(inst, x40, 1.0, 0)[3].applicable);
}

TEST_CASE("dispatch distribution") {
  const auto inst = load("m1.json");
  const auto sol = solve_slp(inst);
  const auto d = dispatch_distribution(inst, sol, "G1");
  REQUIRE(d.support.size() == 5);
  for (int k = 0; k < 5; ++k) {
    CHECK(d.support[k] == doctest::Approx(10.0 * (k + 1)));
    CHECK(d.probs[k] == doctest::Approx(0.2));
  }
  CHECK_THROWS_AS(dispatch_distribution(inst, sol, "nope"), Error);

  auto flat = sol;
  for (auto& s : flat.scenarios) s.X[0] = 5.0;
  const auto a = dispatch_distribution(inst, flat, "G1");
  REQUIRE(a.support.size() == 1);
  CHECK(a.probs[0] == doctest::Approx(1.0).epsilon(1e-12));

  // risk-neutral pre-commitment is the 0.75 quantile of the dispatch
  CHECK(pseudoinverse_cdf(d, 0.75) == doctest::Approx(sol.x[0]));
}

TEST_CASE("monotone duals on random instances") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const auto inst = random_instance(rng);
    const std::size_t ng = inst.generators.size();
    std::vector<double> x(ng), xh(ng);
    for (std::size_t i = 0; i < ng; ++i) {
      x[i] = std::round(u(rng) * inst.max_capacity(static_cast<int>(i)));
      xh[i] = std::round(u(rng) * inst.max_capacity(static_cast<int>(i)));
    }
    for (std::size_t w = 0; w < inst.scenarios.size(); ++w) {
      const auto a = solve_recourse(inst, x, static_cast<int>(w));
      const auto b = solve_recourse(inst, xh, static_cast<int>(w));
      double ip = 0.0;
      for (std::size_t i = 0; i < ng; ++i) ip += (x[i] - xh[i]) * (a.rho[i] - b.rho[i]);
      CHECK(ip >= -1e-8);

      // more demand never lowers prices in aggregate
      auto more = inst;
      for (auto& dm : more.scenarios[w].demand) dm += 5.0 * std::floor(3 * u(rng));
      try {
        const auto c = solve_recourse(more, x, static_cast<int>(w));
        double dp = 0.0;
        for (std::size_t k = 0; k < c.lambda.size(); ++k)
          dp += (more.scenarios[w].demand[k] - inst.scenarios[w].demand[k]) * (c.lambda[k] - a.lambda[k]);
        CHECK(dp >= -1e-8);
      } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Infeasible);
      }

      for (std::size_t i = 0; i < ng; ++i) {
        const auto& g = inst.generators[i];
        CHECK(a.rho[i] >= -g.ramp_up - 1e-8);
        CHECK(a.rho[i] <= g.ramp_down + 1e-8);
        if (a.X[i] > 1e-7 && a.X[i] < g.capacity[w] - 1e-7)
          CHECK(std::abs(a.lambda[g.node] + a.rho[i] - g.cost) <= 1e-8);
      }
      for (double l : a.lambda) {
        CHECK(l >= -1e-9);
        CHECK(l <= inst.network.voll + 1e-9);
      }
    }
  }
}

TEST_CASE("cost recovery in expectation under stochastic dispatch") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 30; ++t) {
    const auto inst = random_instance(rng);
    const auto sol = solve_slp(inst);
    const auto p = inst.probabilities();
    for (std::size_t i = 0; i < inst.generators.size(); ++i) {
      const auto z = profit_by_scenario(inst, sol, static_cast<int>(i));
      double e = 0.0;
      for (std::size_t w = 0; w < p.size(); ++w) e += p[w] * z[w];
      CHECK(e >= -1e-6);
    }
    for (std::size_t w = 0; w < p.size(); ++w)
      for (std::size_t i = 0; i < inst.generators.size(); ++i) {
        const auto& g = inst.generators[i];
        CHECK(std::abs(sol.x[i] + sol.scenarios[w].U[i] - sol.scenarios[w].V[i] - sol.scenarios[w].X[i]) <= 1e-8);
        CHECK(sol.scenarios[w].rho[i] >= -g.ramp_up - 1e-8);
        CHECK(sol.scenarios[w].rho[i] <= g.ramp_down + 1e-8);
      }
  }
}

TEST_CASE("infeasible scenario is named") {
  auto inst = load("m1.json");
  inst.scenarios[4].demand[0] = 500.0;
  try {
    solve_slp(inst);
    FAIL("expected infeasibility");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Infeasible);
    CHECK(std::string(e.what()).find("s5") != std::string::npos);
  }
}
