#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace rasdm {

struct SpectrumPoint {
  double beta;
  double weight;

  bool operator==(const SpectrumPoint&) const = default;
};

// rho(Z) = -E[Z] + kappa * sum_j w_j q_{beta_j}[Z]; coherent for 0 <= kappa <= 1/beta_bar.
// Pure lower-tail mean at tail mass b is kappa = 1/b with a point mass at b.
struct RiskSpec {
  double kappa = 0.0;
  std::vector<SpectrumPoint> spectrum{{1.0, 1.0}};

  double beta_bar() const;
  // throws Error(Invalid) outside the coherence domain
  void check() const;

  static RiskSpec neutral() { return {}; }
  static RiskSpec cvar(double tail) { return {1.0 / tail, {{tail, 1.0}}}; }

  bool operator==(const RiskSpec&) const = default;
};

struct PolyhedralRiskSet {
  std::vector<std::vector<double>> points;  // each a probability vector over scenarios

  bool operator==(const PolyhedralRiskSet&) const = default;
};

using AgentRisk = std::variant<RiskSpec, PolyhedralRiskSet>;

// Z is a discrete random variable: values[k] with probability probs[k]
double expectation(std::span<const double> values, std::span<const double> probs);
double q_beta(std::span<const double> values, std::span<const double> probs, double beta);
double lower_tail_mean(std::span<const double> values, std::span<const double> probs, double beta);
double rho_disutility(std::span<const double> values, std::span<const double> probs, const RiskSpec& spec);

// measure in the risk set attaining rho(Z) = E_mu[-Z]; equal values share tail mass proportionally
std::vector<double> worst_case_measure(std::span<const double> values, std::span<const double> probs,
                                       const RiskSpec& spec);

// throws Error(Invalid) when more than `bound` points would be produced
PolyhedralRiskSet extreme_points(const RiskSpec& spec, std::span<const double> probs, std::size_t bound = 5000);

// max_m E_{P_m}[Z], evaluated through the epigraph LP
double risk_value_lp(std::span<const double> values, const PolyhedralRiskSet& set);

// generic views over either kind of risk set, all in the profit convention
double disutility(std::span<const double> profit, std::span<const double> probs, const AgentRisk& risk);
std::vector<double> separating_measure(std::span<const double> cost, std::span<const double> probs,
                                       const AgentRisk& risk);

// L1 distance from pi to the risk set, via LP; 0 means member
double membership_residual(std::span<const double> pi, std::span<const double> probs, const AgentRisk& risk);

// a common measure of all sets, or nullopt when the intersection is empty
std::optional<std::vector<double>> common_measure(const std::vector<AgentRisk>& risks, std::span<const double> probs);

// largest total-variation distance from P over the set; orders agents by risk aversion
double risk_radius(const AgentRisk& risk, std::span<const double> probs);

void check_risk(const AgentRisk& risk, std::size_t scenarios);

}  // namespace rasdm
