#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "rasdm/error.hpp"
#include "rasdm/newsvendor.hpp"

using namespace rasdm;

namespace {

const EmpiricalDistribution m1{{10, 20, 30, 40, 50}, {0.2, 0.2, 0.2, 0.2, 0.2}};

EmpiricalDistribution random_dist(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> v, p;
  double s = 0.0;
  for (int k = 0; k < n; ++k) {
    v.push_back(std::floor(200.0 * u(rng)));
    p.push_back(u(rng));
    s += p.back();
  }
  for (double& q : p) q /= s;
  return make_distribution(v, p);
}

}  // namespace

TEST_CASE("closed-form quantiles") {
  CHECK(precommit_quantile_no_trading(3, 1, 0, 0.5) == doctest::Approx(0.75));
  CHECK(precommit_quantile_with_trading(3, 1, 0, 0.5) == doctest::Approx(0.75));
  CHECK(precommit_quantile_no_trading(3, 1, 1, 0.5) == doctest::Approx(0.5));
  CHECK(precommit_quantile_with_trading(3, 1, 1, 0.5) == doctest::Approx(5.0 / 6.0));
  for (double k : {0.0, 0.3, 1.0}) {
    CHECK(precommit_quantile_no_trading(3, 1, k, 1.0) == doctest::Approx(0.75));
    CHECK(precommit_quantile_with_trading(3, 1, k, 1.0) == doctest::Approx(0.75));
  }
  // kappa at the top of its range, r_u = r_v
  CHECK(precommit_quantile_with_trading(2, 2, 2, 0.5) == doctest::Approx(0.75));
  CHECK(precommit_quantile_no_trading(2, 2, 2, 0.5) == doctest::Approx(0.25));

  CHECK_THROWS_AS(precommit_quantile_no_trading(3, 1, 2.5, 0.5), Error);
  CHECK_THROWS_AS(precommit_quantile_no_trading(3, 1, -0.1, 0.5), Error);
  CHECK_THROWS_AS(precommit_quantile_with_trading(0, 0, 0, 0.5), Error);
  CHECK_THROWS_AS(precommit_quantile_with_trading(1, 1, 0, 0.0), Error);
}

TEST_CASE("quantiles move apart as risk aversion grows") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 300; ++t) {
    const double ru = 100 * u(rng), rv = 100 * u(rng), bb = 0.9 * u(rng) + 0.05;
    const double k1 = u(rng) / bb, k2 = k1 + 0.5 * (1.0 / bb - k1) * u(rng) + 1e-6;
    if (k2 > 1.0 / bb) continue;
    const double n1 = precommit_quantile_no_trading(ru, rv, k1, bb), n2 = precommit_quantile_no_trading(ru, rv, k2, bb);
    const double w1 = precommit_quantile_with_trading(ru, rv, k1, bb), w2 = precommit_quantile_with_trading(ru, rv, k2, bb);
    CHECK(n2 < n1);
    CHECK(w2 > w1);
    CHECK(w1 >= n1);
    CHECK(n1 > 0.0);
    CHECK(w1 < 1.0);
  }
}

TEST_CASE("brute force on the single-node example") {
  const std::vector<std::pair<TradingMode, double>> want{{TradingMode::NoTrading, 30.0}, {TradingMode::WithTrading, 50.0}};
  for (auto [mode, x] : want) {
    PrecommitProblem prob{3, 1, 0, mode};
    CHECK(brute_force_precommit(prob, m1, RiskSpec::neutral()).x_star == 40.0);
    const auto r = brute_force_precommit(prob, m1, RiskSpec{1.0, {{0.5, 1.0}}});
    CHECK(r.x_star == x);
    REQUIRE(r.argmin.size() == 1);
    const auto c = check_newsvendor(prob, m1, RiskSpec{1.0, {{0.5, 1.0}}});
    CHECK(c.agree);
    CHECK(c.x_star == x);
    CHECK(c.oracle_x_star == x);
  }
  CHECK_THROWS_AS(brute_force_precommit(PrecommitProblem{3, 1}, EmpiricalDistribution{}, RiskSpec::neutral()), Error);
}

TEST_CASE("brute force matches the frozen LP oracle") {
  std::ifstream f(std::string(FIXTURE_DIR) + "/newsvendor_oracle.json");
  REQUIRE(f.good());
  const auto doc = nlohmann::json::parse(f);
  int n = 0;
  for (const auto& c : doc.at("cases")) {
    const EmpiricalDistribution dist{c.at("support").get<std::vector<double>>(), c.at("probs").get<std::vector<double>>()};
    RiskSpec spec;
    spec.kappa = c.at("kappa");
    spec.spectrum.clear();
    for (const auto& s : c.at("spectrum")) spec.spectrum.push_back({s[0], s[1]});
    const TradingMode mode = c.at("mode") == "no_trading" ? TradingMode::NoTrading : TradingMode::WithTrading;
    const PrecommitProblem prob{c.at("r_u"), c.at("r_v"), 0.0, mode};
    const auto r = brute_force_precommit(prob, dist, spec);
    const auto vals = c.at("values").get<std::vector<double>>();
    REQUIRE(r.values.size() == vals.size());
    for (std::size_t k = 0; k < vals.size(); ++k) CHECK(r.values[k] == doctest::Approx(vals[k]).epsilon(1e-9));
    CHECK(r.argmin == c.at("argmin").get<std::vector<double>>());
    const auto chk = check_newsvendor(prob, dist, spec);
    CHECK(chk.x_star == c.at("closed_form_x").get<double>());
    CHECK(chk.agree == c.at("closed_form_agrees").get<bool>());
    ++n;
  }
  CHECK(n == 44);
}

TEST_CASE("closed form agrees with the oracle when the quantile sits in the tail") {
  // inside this regime the worst-case measure is the one the derivation assumes
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int tested = 0;
  for (int t = 0; t < 400 && tested < 100; ++t) {
    const auto dist = random_dist(rng, 3 + static_cast<int>(20 * u(rng)));
    const double beta = 0.1 * (1 + static_cast<int>(9 * u(rng)));
    const RiskSpec spec{u(rng) / beta, {{beta, 1.0}}};
    const TradingMode mode = t % 2 ? TradingMode::NoTrading : TradingMode::WithTrading;
    const PrecommitProblem prob{0.5 + 99.5 * u(rng), 0.5 + 99.5 * u(rng), 0.0, mode};
    const double q = precommit_quantile(mode, prob.r_u, prob.r_v, spec.kappa, beta);
    if (mode == TradingMode::NoTrading ? q > beta : q < 1.0 - beta) continue;
    ++tested;
    CHECK(check_newsvendor(prob, dist, spec).agree);
  }
  CHECK(tested >= 50);
}

TEST_CASE("pre-commitment moves away from the risk-neutral fractile") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto dist = random_dist(rng, 10);
    const double ru = 1 + 50 * u(rng), rv = 1 + 50 * u(rng), bb = 0.1 + 0.8 * u(rng);
    double prev_n = INFINITY, prev_w = -INFINITY;
    const double base = pseudoinverse_cdf(dist, precommit_quantile_no_trading(ru, rv, 0, bb));
    for (int k = 0; k <= 10; ++k) {
      const double kappa = k / (10.0 * bb);
      const double xn = pseudoinverse_cdf(dist, precommit_quantile_no_trading(ru, rv, kappa, bb));
      const double xw = pseudoinverse_cdf(dist, precommit_quantile_with_trading(ru, rv, kappa, bb));
      CHECK(xn <= prev_n);
      CHECK(xw >= prev_w);
      CHECK(xn <= base);
      CHECK(xw >= base);
      prev_n = xn;
      prev_w = xw;
    }
  }
}

TEST_CASE("newsvendor price conversion") {
  const NewsvendorParams nv{20.0, 10.0, 4.0, 15.0};
  const auto d = to_deviation_costs(nv);
  CHECK(d.r_u == 5.0);
  CHECK(d.r_v == 6.0);
  CHECK(d.r_u + d.r_v == nv.e - nv.s);
  CHECK_THROWS_AS(to_deviation_costs({20, 10, 12, 15}), Error);
  CHECK_THROWS_AS(to_deviation_costs({20, 10, 4, 9}), Error);

  // the newsvendor profit is the generator profit with margin p - c
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int t = 0; t < 100; ++t) {
    const double x = u(rng), D = u(rng);
    const double newsvendor = nv.p * D - nv.c * x + nv.s * std::max(0.0, x - D) - nv.e * std::max(0.0, D - x);
    const double generator = (nv.p - nv.c) * D - d.r_v * std::max(0.0, x - D) - d.r_u * std::max(0.0, D - x);
    CHECK(newsvendor == doctest::Approx(generator).epsilon(1e-12));
  }

  const RiskSpec spec{1.0, {{0.5, 1.0}}};
  for (auto mode : {TradingMode::NoTrading, TradingMode::WithTrading}) {
    const auto a = brute_force_precommit(nv, m1, spec, mode);
    const auto b = brute_force_precommit(PrecommitProblem{d.r_u, d.r_v, mode == TradingMode::NoTrading ? nv.p - nv.c : nv.c, mode}, m1, spec);
    CHECK(a.x_star == b.x_star);
    CHECK(a.value == doctest::Approx(b.value));
  }
}

TEST_CASE("expected-profit lower bounds") {
  const auto neutral = RiskCoefficients::of(0.0, 0.5);
  CHECK(neutral.alpha == 1.0);
  CHECK(profit_lower_bound(3, 1, 30, neutral, TradingMode::NoTrading) == 0.0);
  CHECK(profit_lower_bound(3, 1, 30, neutral, TradingMode::WithTrading) == 0.0);
  const auto rc = RiskCoefficients::of(1.0, 0.5);
  CHECK(rc.alpha == doctest::Approx(2.0 / 3.0));
  CHECK(profit_lower_bound(3, 1, 30, rc, TradingMode::NoTrading) == doctest::Approx(30.0));
  CHECK(profit_lower_bound(3, 1, 50, rc, TradingMode::WithTrading) == doctest::Approx(-50.0 / 3.0));
  CHECK(RiskCoefficients::of(RiskSpec::cvar(0.25)).alpha == doctest::Approx(1.0 / 4.0));
  CHECK_THROWS_AS(profit_lower_bound(3, 1, -1, rc, TradingMode::NoTrading), Error);
  CHECK_THROWS_AS(RiskCoefficients::of(3.0, 0.5), Error);
}
