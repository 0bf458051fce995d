#include "doctest.h"
#include "rasdm/error.hpp"
#include "rasdm/io.hpp"
#include "rasdm/report.hpp"

using namespace rasdm;

namespace {

MarketInstance load(const std::string& name) { return parse_instance_text(read_file(std::string(FIXTURE_DIR) + "/" + name)); }

}  // namespace

TEST_CASE("numbers print with 12 significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(318.0) == "318");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(2.5e-7) == "2.5e-07");
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(1.0 / 0.0) == "inf");
  CHECK(canonical_json(Json{{"v", -1.0 / 0.0}}) == "{\n  \"v\": \"-inf\"\n}\n");
}

TEST_CASE("canonical output is independent of construction order") {
  Json a = Json::object();
  a["zeta"] = 1;
  a["alpha"] = {{"b", 0.1 + 0.2}, {"a", Json::array({1, 2.5, "s"})}};
  Json b = Json::object();
  b["alpha"] = {{"a", Json::array({1, 2.5, "s"})}, {"b", 0.3}};
  b["zeta"] = 1;
  CHECK(canonical_json(a) == canonical_json(b));
  CHECK(canonical_json(a) ==
        "{\n  \"alpha\": {\n    \"a\": [1, 2.5, \"s\"],\n    \"b\": 0.3\n  },\n  \"zeta\": 1\n}\n");
  CHECK(canonical_json(Json::object()) == "{}\n");
  CHECK(canonical_json(Json::array()) == "[]\n");
}

TEST_CASE("sha256 and content hash") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(content_hash("{\"a\": 1, \"b\": 2}") == content_hash("{ \"b\":2,\n\"a\":1 }"));
  CHECK(content_hash("{\"a\": 1}") != content_hash("{\"a\": 2}"));
  CHECK(content_hash("not json") == sha256_hex("not json"));
}

TEST_CASE("dispatch report on the single-node example") {
  const auto m1 = load("m1.json");
  const auto sol = solve_slp(m1);
  const auto j = dispatch_json(m1, sol);
  CHECK(j["x"]["G1"].get<double>() == doctest::Approx(40.0));
  CHECK(j["objective"].get<double>() == doctest::Approx(318.0));
  REQUIRE(j["scenarios"].size() == 5);
  for (std::size_t k = 1; k < 5; ++k)
    CHECK(j["scenarios"][k - 1]["omega"].get<std::string>() < j["scenarios"][k]["omega"].get<std::string>());
  for (const auto& p : dispatch_properties(m1, sol)) {
    INFO(p.name);
    CHECK(p.passed);
  }
  // byte-identical on a second solve
  CHECK(canonical_json(dispatch_json(m1, solve_slp(m1))) == canonical_json(j));
}

TEST_CASE("line keys") {
  const auto six = load("six_node.json");
  const auto keys = line_keys(six);
  CHECK(keys.size() == six.network.lines.size());
  for (std::size_t a = 0; a < keys.size(); ++a)
    for (std::size_t b = a + 1; b < keys.size(); ++b) CHECK(keys[a] != keys[b]);
}

TEST_CASE("candidates survive a round trip") {
  const auto two = load("two_node.json");
  const auto sol = solve_slp(two);
  const auto cand = candidate_from_dispatch(two, sol);
  const auto back = candidate_from_json(two, Json{{"candidate", candidate_json(two, cand)}});
  CHECK(back.prices.lambda == cand.prices.lambda);
  CHECK(back.flows == cand.flows);
  REQUIRE(back.generators.size() == cand.generators.size());
  for (std::size_t i = 0; i < cand.generators.size(); ++i) {
    CHECK(back.generators[i].x == cand.generators[i].x);
    CHECK(back.generators[i].X == cand.generators[i].X);
    CHECK(back.generators[i].V == cand.generators[i].V);
  }
  // a solve-sdm report is accepted as a candidate too
  const auto from_report = candidate_from_json(two, Json{{"result", dispatch_json(two, sol)}});
  CHECK(from_report.prices.lambda == cand.prices.lambda);
  CHECK(from_report.generators[1].U == cand.generators[1].U);
  CHECK_THROWS_AS(candidate_from_json(two, Json{{"prices", Json::object()}}), Error);
}

TEST_CASE("pre-commitment input forms") {
  const auto two = load("two_node.json");
  const auto ng = two.generators.size();
  std::vector<double> v(ng);
  Json map = Json::object();
  for (std::size_t i = 0; i < ng; ++i) {
    v[i] = 10.0 * static_cast<double>(i + 1);
    map[two.generators[i].id] = v[i];
  }
  CHECK(commitment_from_json(two, Json(v)) == v);
  CHECK(commitment_from_json(two, map) == v);
  CHECK(commitment_from_json(two, Json{{"result", {{"x", map}}}}) == v);
  CHECK_THROWS_AS(commitment_from_json(two, Json::array({1.0})), Error);
  CHECK_THROWS_AS(commitment_from_json(two, Json(5.0)), Error);
  CHECK(commitment_from_json(load("m1.json"), Json(40.0)) == std::vector<double>{40.0});
}

TEST_CASE("risk-market report carries the measure checks") {
  const auto inst = load("m1_risk.json");
  const auto risks = agent_risks(inst);
  const auto sol = solve_raslp(inst, risks);
  const auto pi = extract_risk_adjusted_measure(inst, risks, sol);
  const auto j = raslp_json(inst, sol, pi);
  CHECK(j["dispatch"]["x"]["G1"].get<double>() == doctest::Approx(50.0));
  double s = 0.0;
  for (const auto& [k, v] : j["pi"].items()) s += v.get<double>();
  CHECK(s == doctest::Approx(1.0));
  const auto props = raslp_properties(inst, sol, pi);
  CHECK(props.size() >= 4);
  for (const auto& p : props) {
    INFO(p.name);
    CHECK(p.passed);
  }
  const auto env = envelope("solve-raslp", "h", {{"tol", 1e-6}}, j, props);
  CHECK(env["properties"].size() == props.size());
  CHECK(env["instance_hash"] == "h");
}
