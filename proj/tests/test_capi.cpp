#include <memory>
#include <string>

#include "doctest.h"
#include "rasdm/rasdm.h"

namespace {

struct InstanceFree {
  void operator()(rasdm_instance* p) const { rasdm_instance_free(p); }
};
struct ReportFree {
  void operator()(rasdm_report* p) const { rasdm_report_free(p); }
};
using Instance = std::unique_ptr<rasdm_instance, InstanceFree>;
using Report = std::unique_ptr<rasdm_report, ReportFree>;

Instance load(const std::string& name) {
  rasdm_instance* p = nullptr;
  const auto st = rasdm_instance_from_file((std::string(FIXTURE_DIR) + "/" + name).c_str(), &p);
  REQUIRE_MESSAGE(st == RASDM_OK, rasdm_last_error());
  return Instance(p);
}

double number(const Report& r, const char* pointer) {
  double v = 0.0;
  const auto st = rasdm_report_number(r.get(), pointer, &v);
  REQUIRE_MESSAGE(st == RASDM_OK, pointer << ": " << rasdm_last_error());
  return v;
}

bool contains(const Report& r, const std::string& needle) {
  return std::string(rasdm_report_json(r.get())).find(needle) != std::string::npos;
}

const char* kM1Distribution = R"({"support": [10, 20, 30, 40, 50], "probs": [0.2, 0.2, 0.2, 0.2, 0.2]})";

}  // namespace

TEST_CASE("instances load through the C API") {
  const auto m1 = load("m1.json");
  CHECK(rasdm_instance_generators(m1.get()) == 1);
  CHECK(rasdm_instance_scenarios(m1.get()) == 5);
  CHECK(std::string(rasdm_instance_hash(m1.get())).size() == 64);
  CHECK(std::string(rasdm_version()) == "1.0.0");

  rasdm_instance* p = reinterpret_cast<rasdm_instance*>(1);
  CHECK(rasdm_instance_from_json("{ not json", &p) == RASDM_INVALID);
  CHECK(p == nullptr);
  CHECK(std::string(rasdm_last_error()).find("parse error") != std::string::npos);
  CHECK(rasdm_instance_from_file("/nonexistent/inst.json", &p) == RASDM_INVALID);
  CHECK(rasdm_instance_from_json(nullptr, &p) == RASDM_INVALID);
  CHECK(std::string(rasdm_status_name(RASDM_EMPTY_INTERSECTION)) == "empty_intersection");

  rasdm_options o;
  rasdm_options_default(&o);
  CHECK(o.tol == 0.0);
  CHECK(o.damping == 0.5);
  CHECK(o.max_iters == 100);
}

TEST_CASE("stochastic dispatch report") {
  const auto m1 = load("m1.json");
  rasdm_report* r = nullptr;
  REQUIRE(rasdm_solve_sdm(m1.get(), &r) == RASDM_OK);
  const Report rep(r);
  CHECK(number(rep, "/result/x/G1") == doctest::Approx(40.0));
  CHECK(number(rep, "/result/objective") == doctest::Approx(318.0).epsilon(1e-9));
  CHECK(contains(rep, std::string("\"instance_hash\": \"") + rasdm_instance_hash(m1.get()) + "\""));
  CHECK(contains(rep, "\"tolerances\""));
  CHECK_FALSE(contains(rep, "\"passed\": false"));

  rasdm_report* again = nullptr;
  REQUIRE(rasdm_solve_sdm(m1.get(), &again) == RASDM_OK);
  const Report rep2(again);
  CHECK(std::string(rasdm_report_json(rep.get())) == rasdm_report_json(rep2.get()));

  double v = 0.0;
  CHECK(rasdm_report_number(rep.get(), "/result/scenarios", &v) == RASDM_INVALID);
  CHECK(rasdm_report_number(rep.get(), "/no/such/key", &v) == RASDM_INVALID);
}

TEST_CASE("recourse report") {
  const auto m1 = load("m1.json");
  rasdm_report* r = nullptr;
  REQUIRE(rasdm_recourse(m1.get(), "40", "s5", &r) == RASDM_OK);
  const Report rep(r);
  CHECK(number(rep, "/result/scenarios/0/lambda/N") == doctest::Approx(13.0));
  CHECK(number(rep, "/result/scenarios/0/profit/G1") == doctest::Approx(120.0));
  CHECK(number(rep, "/result/scenarios/0/settlement/generator_payment/G1") == doctest::Approx(650.0));

  rasdm_report* all = nullptr;
  REQUIRE(rasdm_recourse(m1.get(), R"({"G1": 40})", nullptr, &all) == RASDM_OK);
  const Report rep_all(all);
  CHECK(number(rep_all, "/result/scenarios/0/lambda/N") == doctest::Approx(9.0));
  CHECK(number(rep_all, "/result/scenarios/4/lambda/N") == doctest::Approx(13.0));

  rasdm_report* bad = nullptr;
  CHECK(rasdm_recourse(m1.get(), "40", "nope", &bad) == RASDM_INVALID);
  CHECK(bad == nullptr);
  CHECK(rasdm_recourse(m1.get(), "[1, 2]", nullptr, &bad) == RASDM_INVALID);

  const auto zero = load("zero_demand.json");
  REQUIRE(rasdm_instance_generators(zero.get()) >= 1);
  std::string xs = "[";
  for (size_t i = 0; i < rasdm_instance_generators(zero.get()); ++i) xs += i ? ", 0" : "0";
  xs += "]";
  rasdm_report* z = nullptr;
  REQUIRE(rasdm_recourse(zero.get(), xs.c_str(), nullptr, &z) == RASDM_OK);
  const Report rz(z);
  CHECK(number(rz, "/result/scenarios/0/cost") == 0.0);
}

TEST_CASE("risk-market report") {
  rasdm_report* r = nullptr;
  REQUIRE(rasdm_solve_raslp(load("m1_risk.json").get(), &r) == RASDM_OK);
  const Report rep(r);
  CHECK(number(rep, "/result/dispatch/x/G1") == doctest::Approx(50.0));
  double s = 0.0;
  for (int w = 1; w <= 5; ++w) s += number(rep, ("/result/pi/s" + std::to_string(w)).c_str());
  CHECK(s == doctest::Approx(1.0));
  CHECK_FALSE(contains(rep, "\"passed\": false"));

  rasdm_report* none = nullptr;
  CHECK(rasdm_solve_raslp(load("m1.json").get(), &none) == RASDM_INVALID);
  CHECK(rasdm_solve_raslp(load("empty_intersection.json").get(), &none) == RASDM_EMPTY_INTERSECTION);
  CHECK(std::string(rasdm_last_error()).find("intersection empty") != std::string::npos);
  CHECK(none == nullptr);
}

TEST_CASE("newsvendor report") {
  rasdm_newsvendor_args a{3.0, 1.0, 1.0, 0.5, RASDM_NO_TRADING};
  rasdm_report* r = nullptr;
  REQUIRE(rasdm_newsvendor(kM1Distribution, &a, &r) == RASDM_OK);
  const Report rep(r);
  CHECK(number(rep, "/result/quantile") == doctest::Approx(0.5));
  CHECK(number(rep, "/result/x_star") == doctest::Approx(30.0));
  CHECK(number(rep, "/result/oracle_x_star") == doctest::Approx(30.0));
  CHECK(contains(rep, "\"agree\": true"));

  a.kappa = 0.0;
  REQUIRE(rasdm_newsvendor(kM1Distribution, &a, &r) == RASDM_OK);
  const Report neutral(r);
  CHECK(number(neutral, "/result/quantile") == doctest::Approx(0.75));
  CHECK(number(neutral, "/result/x_star") == doctest::Approx(40.0));

  a.kappa = 2.5;
  r = nullptr;
  CHECK(rasdm_newsvendor(kM1Distribution, &a, &r) == RASDM_INVALID);
  CHECK(r == nullptr);
  a.kappa = 1.0;
  CHECK(rasdm_newsvendor(R"({"support": [1], "probs": [0.5]})", &a, &r) == RASDM_INVALID);
}

TEST_CASE("equilibrium commands") {
  const auto neutral = load("m1_neutral.json");
  rasdm_report* sdm = nullptr;
  REQUIRE(rasdm_solve_sdm(neutral.get(), &sdm) == RASDM_OK);
  const Report sdm_rep(sdm);

  rasdm_report* v = nullptr;
  REQUIRE(rasdm_equilibrium_verify(neutral.get(), rasdm_report_json(sdm_rep.get()), nullptr, &v) == RASDM_OK);
  const Report ver(v);
  CHECK(number(ver, "/result/gaps/max_gap") <= 1e-6);
  CHECK(number(ver, "/result/gaps/agents/0/gap") >= 0.0);

  rasdm_report* none = nullptr;
  CHECK(rasdm_equilibrium_iterate(load("m1.json").get(), nullptr, &none) == RASDM_INVALID);
  CHECK(std::string(rasdm_last_error()).find("risk") != std::string::npos);
  CHECK(rasdm_equilibrium_verify(neutral.get(), "{}", nullptr, &none) == RASDM_INVALID);

  rasdm_report* it = nullptr;
  REQUIRE(rasdm_equilibrium_iterate(load("m1_risk.json").get(), nullptr, &it) == RASDM_OK);
  const Report iter(it);
  CHECK(number(iter, "/result/candidate/generators/G1/x") == doctest::Approx(30.0));
  CHECK(number(iter, "/result/gaps/max_gap") <= 1e-6);
  rasdm_report* trace = nullptr;
  REQUIRE(rasdm_report_extract(iter.get(), "/result/trace", &trace) == RASDM_OK);
  const Report tr(trace);
  CHECK(number(tr, "/0/iter") >= 0.0);

  rasdm_options o;
  rasdm_options_default(&o);
  o.damping = 0.0;
  CHECK(rasdm_equilibrium_iterate(load("m1_risk.json").get(), &o, &none) == RASDM_INVALID);
}

TEST_CASE("duopoly sweep") {
  const double kappas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  rasdm_report* r = nullptr;
  REQUIRE(rasdm_equilibrium_sweep(load("duopoly.json").get(), kappas, 5, nullptr, &r) == RASDM_OK);
  const Report rep(r);
  double prev = 1e300;
  for (int k = 0; k < 5; ++k) {
    const double total = number(rep, ("/result/sweep/" + std::to_string(k) + "/committed_total").c_str());
    CHECK(total <= prev + 1e-9);
    prev = total;
  }
  CHECK(prev == doctest::Approx(30.0));
  CHECK_FALSE(contains(rep, "\"passed\": false"));
  CHECK(rasdm_equilibrium_sweep(load("duopoly.json").get(), kappas, 0, nullptr, &r) == RASDM_INVALID);
}

TEST_CASE("property suites") {
  const auto m1 = load("m1.json");
  rasdm_report* r = nullptr;
  REQUIRE(rasdm_check_properties(m1.get(), "monotonicity", nullptr, &r) == RASDM_OK);
  const Report rep(r);
  CHECK(contains(rep, "\"suite\": \"monotonicity\""));
  CHECK_FALSE(contains(rep, "\"passed\": false"));

  rasdm_report* bad = nullptr;
  CHECK(rasdm_check_properties(m1.get(), "nope", nullptr, &bad) == RASDM_INVALID);
  CHECK(std::string(rasdm_last_error()).find("corollary2") != std::string::npos);
}
