#pragma once

#include <boost/rational.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rasdm/risk.hpp"

namespace rasdm {

using Rational = boost::rational<long long>;

struct Line {
  int from;
  int to;
  double susceptance;
  double capacity;
};

struct Network {
  std::vector<std::string> nodes;
  std::vector<Line> lines;
  double voll = 0.0;

  int node_index(const std::string& id) const;  // -1 if unknown
};

struct Generator {
  std::string id;
  int node = 0;
  double cost = 0.0;
  double ramp_up = 0.0;    // $/MWh above the pre-commitment
  double ramp_down = 0.0;  // $/MWh below it
  bool inflexible = false; // cannot deviate at all
  std::vector<double> capacity;  // per scenario
};

struct Probability {
  double value = 0.0;
  std::optional<Rational> exact;
};

struct Scenario {
  std::string id;
  Probability prob;
  std::vector<double> demand;  // per node
};

struct MarketInstance {
  Network network;
  std::vector<Generator> generators;
  std::vector<Scenario> scenarios;
  std::map<std::string, AgentRisk> risk;  // keyed by generator id, "iso" or "default"
  bool has_risk_block = false;

  std::vector<double> probabilities() const;
  int generator_index(const std::string& id) const;  // -1 if unknown
  int scenario_index(const std::string& id) const;   // -1 if unknown
  double max_capacity(int gen) const;
};

struct Violation {
  std::string code;
  std::string message;
};

std::vector<Violation> validate_instance(const MarketInstance& inst);

// throws Error(Invalid) listing every violation
void require_valid(const MarketInstance& inst);

struct EmpiricalDistribution {
  std::vector<double> support;  // ascending
  std::vector<double> probs;

  double cdf(double x) const;
};

// sorts and merges values closer than merge_tol
EmpiricalDistribution make_distribution(const std::vector<double>& values, const std::vector<double>& probs,
                                        double merge_tol = 1e-9);

// inf{x in support : F(x) >= p}
double pseudoinverse_cdf(const EmpiricalDistribution& dist, double p);

}  // namespace rasdm
