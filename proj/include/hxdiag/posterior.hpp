#ifndef HXDIAG_POSTERIOR_HPP
#define HXDIAG_POSTERIOR_HPP

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hxdiag/degradation.hpp"

namespace hxdiag {

struct ParamDiagnostics {
  double r_hat = 0.0;
  double ess = 0.0;
};

// Engine-agnostic posterior sample container.  Both the MCMC sampler and the
// amortized engine produce one of these, so downstream scoring code never
// cares which engine ran.
struct PosteriorEnsemble {
  std::vector<DegradationTheta> thetas;
  std::vector<int> chain_ids;              // all zero for amortized draws
  std::array<long, 4> mode_counts{};       // tally of sampled mode labels
  FailureLabel point_mode = FailureLabel::None;  // engine's mode decision
  std::map<std::string, ParamDiagnostics> diagnostics;  // empty for amortized draws
  double wall_time_seconds = 0.0;
  long simulator_call_count = 0;

  FailureLabel plurality_mode() const {
    int best = 0;
    for (int z = 1; z < 4; ++z)
      if (mode_counts[z] > mode_counts[best]) best = z;
    return failure_label_from_int(best);
  }

  std::vector<double> parameter_samples(const std::string& name) const {
    std::vector<double> out;
    out.reserve(thetas.size());
    for (const auto& t : thetas) {
      if (name == "tau") out.push_back(t.params.tau);
      else if (name == "beta_f") out.push_back(t.params.beta_f);
      else if (name == "beta_l") out.push_back(t.params.beta_l);
      else if (name == "lambda") out.push_back(t.params.lambda);
      else throw std::invalid_argument("unknown parameter name: " + name);
    }
    return out;
  }
};

}  // namespace hxdiag

#endif  // HXDIAG_POSTERIOR_HPP
