#include <algorithm>
#include <random>

#include "doctest.h"
#include "rasdm/error.hpp"
#include "rasdm/io.hpp"
#include "rasdm/model.hpp"

using namespace rasdm;

namespace {

bool has_code(const std::vector<Violation>& v, const std::string& code) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

MarketInstance load(const std::string& name) { return parse_instance_text(read_file(std::string(FIXTURE_DIR) + "/" + name)); }

}  // namespace

TEST_CASE("fixtures validate") {
  for (const char* f : {"m1.json", "six_node.json", "duopoly.json", "zero_demand.json", "two_node.json"}) {
    CAPTURE(f);
    CHECK(validate_instance(load(f)).empty());
  }
}

TEST_CASE("all-flexible instance is rejected") {
  auto inst = load("m1.json");
  inst.generators[0].ramp_up = inst.generators[0].ramp_down = 0.0;
  const auto v = validate_instance(inst);
  CHECK(has_code(v, "no_inflexible_generator"));
  CHECK_THROWS_AS(require_valid(inst), Error);
}

TEST_CASE("probability normalization") {
  auto inst = load("m1.json");
  for (auto& s : inst.scenarios) s.prob = {0.18, std::nullopt};
  const auto v = validate_instance(inst);
  REQUIRE(has_code(v, "probabilities_not_normalized"));
  CHECK(std::find_if(v.begin(), v.end(), [](auto& x) { return x.message == "probabilities not normalized"; }) != v.end());
}

TEST_CASE("exact fractions sum exactly") {
  auto inst = load("m1.json");
  for (auto& s : inst.scenarios) s.prob = {0.2, Rational(1, 3)};
  CHECK(has_code(validate_instance(inst), "probabilities_not_normalized"));
  for (auto& s : inst.scenarios) s.prob = {0.2, Rational(1, 5)};
  CHECK_FALSE(has_code(validate_instance(inst), "probabilities_not_normalized"));
  // six-node fixture writes 1/25 as strings
  const auto six = load("six_node.json");
  REQUIRE(six.scenarios[0].prob.exact.has_value());
  CHECK(*six.scenarios[0].prob.exact == Rational(1, 25));
}

TEST_CASE("structural violations") {
  auto inst = load("two_node.json");
  inst.network.lines[0].capacity = 0.0;
  CHECK(has_code(validate_instance(inst), "bad_line_capacity"));
  inst = load("two_node.json");
  inst.network.lines.clear();
  CHECK(has_code(validate_instance(inst), "disconnected"));
  inst = load("m1.json");
  inst.network.voll = -1.0;
  CHECK(has_code(validate_instance(inst), "bad_voll"));
  inst = load("m1.json");
  inst.generators[0].cost = -2.0;
  CHECK(has_code(validate_instance(inst), "bad_cost"));
}

TEST_CASE("parse errors are reported as invalid input") {
  CHECK_THROWS_AS(parse_instance_text("{ not json"), Error);
  CHECK_THROWS_AS(parse_instance_text("{\"nodes\": [\"A\"]}"), Error);
  CHECK_THROWS_AS(parse_instance_text(R"({"nodes":["A"],"voll":10,"scenarios":[{"id":"s","prob":"1/0"}],"generators":[]})"),
                  Error);
}

TEST_CASE("pseudoinverse examples") {
  const auto d = make_distribution({10, 20, 30, 40, 50}, std::vector<double>(5, 0.2));
  CHECK(pseudoinverse_cdf(d, 0.75) == 40);
  CHECK(pseudoinverse_cdf(d, 0.0) == 10);
  CHECK(pseudoinverse_cdf(d, 1.0) == 50);
  CHECK(pseudoinverse_cdf(d, 0.6) == 30);
  const auto atom = make_distribution({7}, {1.0});
  for (double p : {0.0, 0.3, 1.0}) CHECK(pseudoinverse_cdf(atom, p) == 7);
  CHECK_THROWS_AS(pseudoinverse_cdf(d, -0.1), Error);
  CHECK_THROWS_AS(pseudoinverse_cdf(d, 1.1), Error);
}

TEST_CASE("distribution merging") {
  const auto d = make_distribution({8, 8 + 1e-11}, {0.3, 0.7});
  REQUIRE(d.support.size() == 1);
  CHECK(d.probs[0] == doctest::Approx(1.0));
  const auto s = make_distribution({3, 1, 2}, {0.2, 0.5, 0.3});
  CHECK(std::is_sorted(s.support.begin(), s.support.end()));
  CHECK(s.cdf(1.5) == doctest::Approx(0.5));
}

TEST_CASE("pseudoinverse properties") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + t % 15;
    std::vector<double> v(n), p(n);
    double tot = 0.0;
    for (int k = 0; k < n; ++k) {
      v[k] = std::round(100 * u(rng));
      p[k] = u(rng) + 0.01;
      tot += p[k];
    }
    for (double& x : p) x /= tot;
    const auto d = make_distribution(v, p);
    double prev = -1e300;
    for (int k = 0; k <= 50; ++k) {
      const double x = pseudoinverse_cdf(d, k / 50.0);
      CHECK(x >= prev);
      CHECK(std::find(d.support.begin(), d.support.end(), x) != d.support.end());
      prev = x;
    }
    for (double x : d.support) CHECK(pseudoinverse_cdf(d, std::min(1.0, d.cdf(x))) <= x);
  }
}
