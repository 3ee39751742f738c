#ifndef HXDIAG_SCENARIOS_HPP
#define HXDIAG_SCENARIOS_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hxdiag/degradation.hpp"
#include "hxdiag/prob_model.hpp"

namespace hxdiag {

// One synthetic evaluation setting: a true mode plus the subset of
// parameters the scenario pins.  Unpinned parameters fall back to the prior
// median when generating data and are not scored.
struct ScenarioSpec {
  std::string name;
  FailureLabel mode = FailureLabel::None;
  std::optional<double> tau;
  std::optional<double> beta_f;
  std::optional<double> beta_l;
  std::optional<double> lambda;
  int n_realizations = 500;

  DegradationTheta truth(const PriorSpec& prior) const {
    DegradationTheta theta;
    theta.mode.label = mode;
    theta.params = prior.median_params();
    if (tau) theta.params.tau = *tau;
    if (beta_f) theta.params.beta_f = *beta_f;
    if (beta_l) theta.params.beta_l = *beta_l;
    if (lambda) theta.params.lambda = *lambda;
    theta.params.validate();
    if (!(theta.params.tau > prior.tau_min && theta.params.tau < prior.tau_max))
      throw std::invalid_argument("scenario tau outside the prior support");
    return theta;
  }

  // Parameters whose recovery is meaningful for this scenario: anything the
  // scenario pins, plus the changepoint whenever a failure is actually on.
  std::vector<std::string> scored_parameters() const {
    std::vector<std::string> out;
    if (mode != FailureLabel::None && tau) out.push_back("tau");
    if (beta_f) out.push_back("beta_f");
    if (beta_l) out.push_back("beta_l");
    if (lambda) out.push_back("lambda");
    return out;
  }

  double true_value(const std::string& param, const PriorSpec& prior) const {
    const DegradationTheta t = truth(prior);
    if (param == "tau") return t.params.tau;
    if (param == "beta_f") return t.params.beta_f;
    if (param == "beta_l") return t.params.beta_l;
    if (param == "lambda") return t.params.lambda;
    throw std::invalid_argument("unknown parameter name: " + param);
  }
};

// The six standard evaluation scenarios.
inline std::vector<ScenarioSpec> default_scenarios() {
  std::vector<ScenarioSpec> s(6);
  s[0] = {"weak_fouling", FailureLabel::Fouling, 18.0, 0.005, std::nullopt, 5.0, 500};
  s[1] = {"batch_shutdown", FailureLabel::Fouling, 18.0, 0.03, std::nullopt, 0.5, 500};
  s[2] = {"boiler_feedwater", FailureLabel::Fouling, 18.0, 0.05, std::nullopt, 3.0, 500};
  s[3] = {"mild_leak", FailureLabel::Leakage, 18.0, std::nullopt, 0.0005, std::nullopt, 500};
  s[4] = {"severe_leak", FailureLabel::Leakage, 18.0, std::nullopt, 0.0010, std::nullopt, 500};
  s[5] = {"no_failure", FailureLabel::None, std::nullopt, std::nullopt, std::nullopt,
          std::nullopt, 500};
  return s;
}

}  // namespace hxdiag

#endif  // HXDIAG_SCENARIOS_HPP
