#ifndef HXDIAG_PROB_MODEL_HPP
#define HXDIAG_PROB_MODEL_HPP

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hxdiag/degradation.hpp"
#include "hxdiag/observation.hpp"
#include "hxdiag/rng.hpp"

namespace hxdiag {

inline constexpr double kLn2Pi = 1.8378770664093454836;

// Prior over failure mode and degradation parameters.  The changepoint is
// uniform on [1, T-1]; the positive parameters are log-normal.  Every
// continuous parameter is drawn regardless of mode, so the parameter space
// has a fixed dimension across modes.
struct PriorSpec {
  std::array<double, 4> mode_probs{0.4, 0.2, 0.2, 0.2};  // none, fouling, leakage, both
  double tau_min = 1.0;
  double tau_max = 99.0;
  double log_beta_f_loc = std::log(0.015);
  double log_beta_f_scale = 1.0;
  double log_beta_l_loc = std::log(0.0004);
  double log_beta_l_scale = 0.4;
  double log_lambda_loc = std::log(2.0);
  double log_lambda_scale = 0.5;
  double k_gate = 2.0;
  double k_relax = 50.0;

  static PriorSpec for_horizon(int horizon) {
    if (horizon < 2) throw std::invalid_argument("horizon must be at least 2");
    PriorSpec p;
    p.tau_min = 1.0;
    p.tau_max = static_cast<double>(horizon - 1);
    return p;
  }

  void validate() const {
    double total = 0.0;
    for (double w : mode_probs) {
      if (!(w > 0.0)) throw std::invalid_argument("mode probabilities must be positive");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("mode probabilities must sum to 1");
    if (!(tau_max > tau_min)) throw std::invalid_argument("tau_max must exceed tau_min");
    if (!(log_beta_f_scale > 0.0 && log_beta_l_scale > 0.0 && log_lambda_scale > 0.0))
      throw std::invalid_argument("log-normal scales must be positive");
    if (!(k_gate > 0.0 && k_relax > 0.0))
      throw std::invalid_argument("gate steepness constants must be positive");
  }

  DegradationParams median_params() const {
    DegradationParams p;
    p.tau = 0.5 * (tau_min + tau_max);
    p.beta_f = std::exp(log_beta_f_loc);
    p.beta_l = std::exp(log_beta_l_loc);
    p.lambda = std::exp(log_lambda_loc);
    p.k_gate = k_gate;
    p.k_relax = k_relax;
    return p;
  }
};

inline double normal_logpdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) throw std::domain_error("normal sd must be positive");
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * kLn2Pi;
}

inline double lognormal_logpdf(double x, double log_loc, double log_scale) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  const double z = (std::log(x) - log_loc) / log_scale;
  return -0.5 * z * z - std::log(x * log_scale) - 0.5 * kLn2Pi;
}

inline double exponential_mean_logpdf(double x, double mean) {
  if (!(mean > 0.0)) throw std::domain_error("exponential mean must be positive");
  if (!(x >= 0.0)) return -std::numeric_limits<double>::infinity();
  return -std::log(mean) - x / mean;
}

// Draw order pinned: mode, tau, beta_f, beta_l, lambda.
inline DegradationTheta sample_prior(const PriorSpec& prior, Rng& rng) {
  prior.validate();
  DegradationTheta theta;
  theta.mode.label = failure_label_from_int(rng.categorical(prior.mode_probs));
  theta.params.tau = rng.uniform(prior.tau_min, prior.tau_max);
  theta.params.beta_f = rng.lognormal(prior.log_beta_f_loc, prior.log_beta_f_scale);
  theta.params.beta_l = rng.lognormal(prior.log_beta_l_loc, prior.log_beta_l_scale);
  theta.params.lambda = rng.lognormal(prior.log_lambda_loc, prior.log_lambda_scale);
  theta.params.k_gate = prior.k_gate;
  theta.params.k_relax = prior.k_relax;
  return theta;
}

inline double log_prior(const DegradationTheta& theta, const PriorSpec& prior) {
  prior.validate();
  const DegradationParams& p = theta.params;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  if (!(p.tau > prior.tau_min && p.tau < prior.tau_max)) return neg_inf;
  double lp = std::log(prior.mode_probs[static_cast<int>(theta.mode.label)]);
  lp += -std::log(prior.tau_max - prior.tau_min);
  lp += lognormal_logpdf(p.beta_f, prior.log_beta_f_loc, prior.log_beta_f_scale);
  lp += lognormal_logpdf(p.beta_l, prior.log_beta_l_loc, prior.log_beta_l_scale);
  lp += lognormal_logpdf(p.lambda, prior.log_lambda_loc, prior.log_lambda_scale);
  return lp;
}

namespace detail {

// Gaussian likelihood of all six channels against the noise-free simulation.
inline double channel_loglik(const ObservationSeries& obs, const ObservationSeries& clean,
                             const OperatingConditions& cond) {
  if (!(cond.noise_temp > 0.0 && cond.noise_flow > 0.0))
    throw std::domain_error("likelihood requires strictly positive noise levels");
  const int n = obs.size();
  const double lt = std::log(cond.noise_temp);
  const double lf = std::log(cond.noise_flow);
  const double it = 1.0 / (cond.noise_temp * cond.noise_temp);
  const double fl = 1.0 / (cond.noise_flow * cond.noise_flow);
  double sq_t = 0.0, sq_f = 0.0;
  for (int i = 0; i < n; ++i) {
    double d = obs.t_hot_in[i] - clean.t_hot_in[i];
    sq_t += d * d;
    d = obs.t_hot_out[i] - clean.t_hot_out[i];
    sq_t += d * d;
    d = obs.t_cold_in[i] - clean.t_cold_in[i];
    sq_t += d * d;
    d = obs.t_cold_out[i] - clean.t_cold_out[i];
    sq_t += d * d;
    d = obs.m_hot_in[i] - clean.m_hot_in[i];
    sq_f += d * d;
    d = obs.m_hot_out[i] - clean.m_hot_out[i];
    sq_f += d * d;
  }
  return -0.5 * (sq_t * it + sq_f * fl) - 4.0 * n * lt - 2.0 * n * lf - 3.0 * n * kLn2Pi;
}

}  // namespace detail

// Workspace variant: reuses the trajectory and channel buffers, which matters
// inside samplers that evaluate the joint tens of thousands of times.
struct JointWorkspace {
  LatentTrajectory traj;
  ObservationSeries clean;
};

// log p(mode, params, latents, observations).  Latent draws enter in natural
// scale: u_i uniform, J_i and dL_i exponential with means beta_f and beta_l.
// The trajectory paths are recomputed from the draws, so callers only need to
// supply uniform_draws / jump_sizes / leak_increments.
inline double log_joint(const DegradationTheta& theta, const LatentTrajectory& latents,
                        const ObservationSeries& obs, const OperatingConditions& cond,
                        const PriorSpec& prior, JointWorkspace* ws = nullptr) {
  cond.validate();
  obs.validate();
  if (obs.size() != cond.horizon)
    throw std::invalid_argument("observation length does not match conditions");
  const std::size_t T = static_cast<std::size_t>(cond.horizon);
  if (latents.uniform_draws.size() != T || latents.jump_sizes.size() != T ||
      latents.leak_increments.size() != T)
    throw std::invalid_argument("latent draw arrays must match the horizon");

  const double neg_inf = -std::numeric_limits<double>::infinity();
  double lp = log_prior(theta, prior);
  if (!std::isfinite(lp)) return neg_inf;

  const DegradationParams& p = theta.params;
  double sum_jump = 0.0, sum_leak = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double u = latents.uniform_draws[i];
    if (!(u > 0.0 && u < 1.0)) return neg_inf;
    if (!(latents.jump_sizes[i] >= 0.0) || !(latents.leak_increments[i] >= 0.0))
      return neg_inf;
    sum_jump += latents.jump_sizes[i];
    sum_leak += latents.leak_increments[i];
  }
  const double td = static_cast<double>(T);
  lp += -td * std::log(p.beta_f) - sum_jump / p.beta_f;
  lp += -td * std::log(p.beta_l) - sum_leak / p.beta_l;
  if (!std::isfinite(lp)) return neg_inf;

  JointWorkspace local;
  JointWorkspace& w = ws ? *ws : local;
  w.traj.uniform_draws = latents.uniform_draws;
  w.traj.jump_sizes = latents.jump_sizes;
  w.traj.leak_increments = latents.leak_increments;
  build_fouling_path(p, theta.mode, w.traj.uniform_draws, w.traj.jump_sizes,
                     w.traj.fouling_factor, w.traj.jump_gates);
  build_leak_path(p, theta.mode, w.traj.leak_increments, w.traj.leak_fraction);
  noise_free_channels_into(w.traj, cond, w.clean);
  return lp + detail::channel_loglik(obs, w.clean, cond);
}

}  // namespace hxdiag

#endif  // HXDIAG_PROB_MODEL_HPP
