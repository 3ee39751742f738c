#ifndef HXDIAG_DEGRADATION_HPP
#define HXDIAG_DEGRADATION_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hxdiag/rng.hpp"

namespace hxdiag {

enum class FailureLabel : int { None = 0, Fouling = 1, Leakage = 2, Both = 3 };

inline const char* failure_label_name(FailureLabel label) {
  switch (label) {
    case FailureLabel::None: return "none";
    case FailureLabel::Fouling: return "fouling";
    case FailureLabel::Leakage: return "leakage";
    case FailureLabel::Both: return "both";
  }
  throw std::invalid_argument("unknown failure label");
}

inline FailureLabel failure_label_from_int(int z) {
  if (z < 0 || z > 3) throw std::invalid_argument("failure label out of range");
  return static_cast<FailureLabel>(z);
}

// Discrete failure mode with its channel gates.  g_f and g_l are derived from
// the label so the gate/label consistency cannot drift.
struct FailureMode {
  FailureLabel label = FailureLabel::None;

  bool fouling_active() const {
    return label == FailureLabel::Fouling || label == FailureLabel::Both;
  }
  bool leakage_active() const {
    return label == FailureLabel::Leakage || label == FailureLabel::Both;
  }
  double g_f() const { return fouling_active() ? 1.0 : 0.0; }
  double g_l() const { return leakage_active() ? 1.0 : 0.0; }
};

// Continuous degradation parameters.  k_gate and k_relax are fixed shape
// constants of the model, carried alongside so a trajectory is a pure
// function of this struct plus the raw draws.
struct DegradationParams {
  double tau = 50.0;        // changepoint, steps
  double beta_f = 0.015;    // mean fouling jump, (m^2 K)/W
  double beta_l = 0.0004;   // mean leak increment, per step
  double lambda = 2.0;      // jump intensity, per step
  double k_gate = 2.0;      // onset sigmoid steepness
  double k_relax = 50.0;    // relaxed-indicator steepness

  void validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
    if (!(beta_f > 0.0)) throw std::invalid_argument("beta_f must be positive");
    if (!(beta_l > 0.0)) throw std::invalid_argument("beta_l must be positive");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(k_gate > 0.0)) throw std::invalid_argument("k_gate must be positive");
    if (!(k_relax > 0.0)) throw std::invalid_argument("k_relax must be positive");
  }
};

struct DegradationTheta {
  FailureMode mode;
  DegradationParams params;
};

// Raw per-step draws plus the accumulated paths built from them.
// Natural-scale storage: jump_sizes are the J_i, leak_increments the dL_i.
struct LatentTrajectory {
  std::vector<double> fouling_factor;   // R(t), t = 1..T
  std::vector<double> leak_fraction;    // L(t), t = 1..T
  std::vector<double> jump_gates;       // relaxed indicators I_i, in (0, 1)
  std::vector<double> jump_sizes;       // J_i >= 0
  std::vector<double> leak_increments;  // dL_i >= 0
  std::vector<double> uniform_draws;    // u_i, in (0, 1)

  int horizon() const { return static_cast<int>(fouling_factor.size()); }
};

inline double stable_logistic(double a) {
  if (a >= 0.0) {
    return 1.0 / (1.0 + std::exp(-a));
  }
  const double e = std::exp(a);
  return e / (1.0 + e);
}

// S(t) = 1 / (1 + exp(-k (t - tau)))
inline double sigmoid_gate(double t, double tau, double k_gate) {
  if (!(k_gate > 0.0)) throw std::domain_error("k_gate must be positive");
  return stable_logistic(k_gate * (t - tau));
}

// P_jump = 1 - exp(-lambda)
inline double jump_probability(double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("lambda must be positive");
  return -std::expm1(-lambda);
}

// Smooth surrogate for 1[u < P_jump]
inline double relaxed_indicator(double p_jump, double u, double k_relax) {
  if (!(p_jump >= 0.0 && p_jump <= 1.0)) throw std::domain_error("p_jump must lie in [0, 1]");
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("u must lie in (0, 1)");
  if (!(k_relax > 0.0)) throw std::domain_error("k_relax must be positive");
  return stable_logistic(k_relax * (p_jump - u));
}

// UA(t) = UA_clean / (1 + R(t))
inline double effective_ua(double ua_clean, double fouling_factor) {
  if (!(ua_clean > 0.0)) throw std::domain_error("ua_clean must be positive");
  if (!(fouling_factor >= 0.0)) throw std::domain_error("fouling factor must be non-negative");
  return ua_clean / (1.0 + fouling_factor);
}

// mdot_out = mdot_in (1 - L(t))
inline double effective_hot_outlet_flow(double mass_flow_in, double leak_fraction) {
  if (!(mass_flow_in > 0.0)) throw std::domain_error("mass_flow_in must be positive");
  if (!(leak_fraction >= 0.0 && leak_fraction < 1.0))
    throw std::domain_error("leak fraction must lie in [0, 1)");
  return mass_flow_in * (1.0 - leak_fraction);
}

// Post-onset drift of R per step: (1 - exp(-lambda)) * beta_f * g_f
inline double expected_fouling_slope(const DegradationParams& params, const FailureMode& mode) {
  params.validate();
  return jump_probability(params.lambda) * params.beta_f * mode.g_f();
}

// Deterministic accumulation of the fouling path from raw draws.
inline void build_fouling_path(const DegradationParams& params, const FailureMode& mode,
                               const std::vector<double>& uniform_draws,
                               const std::vector<double>& jump_sizes,
                               std::vector<double>& fouling_factor,
                               std::vector<double>& jump_gates) {
  const std::size_t T = uniform_draws.size();
  if (jump_sizes.size() != T) throw std::invalid_argument("draw arrays must share a horizon");
  fouling_factor.resize(T);
  jump_gates.resize(T);
  const double p_jump = jump_probability(params.lambda);
  const double g = mode.g_f();
  double r = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double t = static_cast<double>(i + 1);
    const double gate = relaxed_indicator(p_jump, uniform_draws[i], params.k_relax);
    jump_gates[i] = gate;
    if (!(jump_sizes[i] >= 0.0)) throw std::invalid_argument("jump sizes must be non-negative");
    r += sigmoid_gate(t, params.tau, params.k_gate) * gate * jump_sizes[i] * g;
    fouling_factor[i] = r;
  }
}

// Deterministic accumulation of the leak path.  The exponent is clamped so
// L stays strictly below the 0.95 ceiling even for absurd accumulations.
inline void build_leak_path(const DegradationParams& params, const FailureMode& mode,
                            const std::vector<double>& leak_increments,
                            std::vector<double>& leak_fraction) {
  const std::size_t T = leak_increments.size();
  leak_fraction.resize(T);
  const double g = mode.g_l();
  double acc = 0.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double t = static_cast<double>(i + 1);
    if (!(leak_increments[i] >= 0.0))
      throw std::invalid_argument("leak increments must be non-negative");
    acc += sigmoid_gate(t, params.tau, params.k_gate) * g * leak_increments[i];
    leak_fraction[i] = 0.95 * -std::expm1(-std::min(acc, 700.0));
  }
}

inline LatentTrajectory trajectory_from_draws(const DegradationParams& params,
                                              const FailureMode& mode,
                                              std::vector<double> uniform_draws,
                                              std::vector<double> jump_sizes,
                                              std::vector<double> leak_increments) {
  params.validate();
  if (uniform_draws.size() != jump_sizes.size() ||
      uniform_draws.size() != leak_increments.size())
    throw std::invalid_argument("draw arrays must share a horizon");
  LatentTrajectory traj;
  traj.uniform_draws = std::move(uniform_draws);
  traj.jump_sizes = std::move(jump_sizes);
  traj.leak_increments = std::move(leak_increments);
  build_fouling_path(params, mode, traj.uniform_draws, traj.jump_sizes,
                     traj.fouling_factor, traj.jump_gates);
  build_leak_path(params, mode, traj.leak_increments, traj.leak_fraction);
  return traj;
}

// Draw order is pinned (u sweep, then J sweep, then dL sweep) so a given seed
// reproduces byte-identical trajectories regardless of caller.
inline LatentTrajectory sample_trajectory(const DegradationParams& params,
                                          const FailureMode& mode, int horizon, Rng& rng) {
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  params.validate();
  const std::size_t T = static_cast<std::size_t>(horizon);
  std::vector<double> u(T), jumps(T), incr(T);
  for (std::size_t i = 0; i < T; ++i) u[i] = rng.uniform();
  for (std::size_t i = 0; i < T; ++i) jumps[i] = rng.exponential_mean(params.beta_f);
  for (std::size_t i = 0; i < T; ++i) incr[i] = rng.exponential_mean(params.beta_l);
  return trajectory_from_draws(params, mode, std::move(u), std::move(jumps), std::move(incr));
}

}  // namespace hxdiag

#endif  // HXDIAG_DEGRADATION_HPP
