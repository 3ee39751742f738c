#ifndef HXDIAG_ADAPTIVE_MH_HPP
#define HXDIAG_ADAPTIVE_MH_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hxdiag/rng.hpp"

namespace hxdiag {

// Robbins-Monro step-size adaptation toward a target acceptance rate.
// Adaptation decays as count^-0.6 and can be frozen, after which the scale is
// fixed and the kernel satisfies detailed balance exactly.
struct AdaptiveScale {
  double log_scale = std::log(0.1);
  double target_accept = 0.3;
  double learn_rate = 1.0;
  long count = 0;
  bool frozen = false;

  double scale() const { return std::exp(log_scale); }

  void adapt(double accept_prob) {
    if (frozen) return;
    ++count;
    const double gamma = learn_rate / std::pow(static_cast<double>(count), 0.6);
    log_scale += gamma * (accept_prob - target_accept);
    log_scale = std::clamp(log_scale, -12.0, 6.0);
  }
};

// One random-walk Metropolis update of the coordinates in `idx`, using a
// shared isotropic scale.  `logpdf` evaluates the target at the full state.
// Returns true on acceptance; `cur_lp` is kept in sync.
template <class LogPdf>
bool metropolis_block_step(std::vector<double>& x, std::span<const int> idx,
                           AdaptiveScale& step, LogPdf&& logpdf, double& cur_lp,
                           Rng& rng) {
  static thread_local std::vector<double> saved;
  saved.resize(idx.size());
  const double s = step.scale();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    saved[k] = x[idx[k]];
    x[idx[k]] += s * rng.normal();
  }
  const double prop_lp = logpdf(x);
  const double log_alpha = prop_lp - cur_lp;
  const double alpha = std::min(1.0, std::exp(std::min(log_alpha, 0.0)));
  bool accepted;
  if (std::log(rng.uniform()) < log_alpha) {
    cur_lp = prop_lp;
    accepted = true;
  } else {
    for (std::size_t k = 0; k < idx.size(); ++k) x[idx[k]] = saved[k];
    accepted = false;
  }
  step.adapt(alpha);
  return accepted;
}

}  // namespace hxdiag

#endif  // HXDIAG_ADAPTIVE_MH_HPP
