#ifndef HXDIAG_OBSERVATION_HPP
#define HXDIAG_OBSERVATION_HPP

#include <stdexcept>
#include <vector>

#include "hxdiag/degradation.hpp"
#include "hxdiag/rng.hpp"
#include "hxdiag/thermal.hpp"

namespace hxdiag {

// Plant description plus sensor noise levels.  The horizon is part of the
// operating conditions because every series derived from them shares it.
struct OperatingConditions {
  FluidStream hot_inlet{1.0, 4184.0, 363.15};
  FluidStream cold_inlet{1.0, 4184.0, 293.15};
  double ua_clean = 5000.0;
  int horizon = 100;
  double noise_temp = 0.5;   // K
  double noise_flow = 0.01;  // kg/s

  void validate() const {
    hot_inlet.validate();
    cold_inlet.validate();
    if (!(ua_clean > 0.0)) throw std::invalid_argument("ua_clean must be positive");
    if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
    if (!(noise_temp >= 0.0)) throw std::invalid_argument("noise_temp must be non-negative");
    if (!(noise_flow >= 0.0)) throw std::invalid_argument("noise_flow must be non-negative");
  }
};

// Six sensor channels over the horizon.
struct ObservationSeries {
  std::vector<double> t_hot_in;
  std::vector<double> t_hot_out;
  std::vector<double> t_cold_in;
  std::vector<double> t_cold_out;
  std::vector<double> m_hot_in;
  std::vector<double> m_hot_out;

  int size() const { return static_cast<int>(t_hot_in.size()); }

  void resize(int n) {
    t_hot_in.resize(n);
    t_hot_out.resize(n);
    t_cold_in.resize(n);
    t_cold_out.resize(n);
    m_hot_in.resize(n);
    m_hot_out.resize(n);
  }

  void validate() const {
    const std::size_t n = t_hot_in.size();
    if (t_hot_out.size() != n || t_cold_in.size() != n || t_cold_out.size() != n ||
        m_hot_in.size() != n || m_hot_out.size() != n)
      throw std::invalid_argument("observation channels must share a length");
  }
};

// Noise-free channels for a fixed latent trajectory.  Leakage feeds back into
// the hot-side capacity rate: the steady state at step t is solved with the
// reduced hot flow, and the same reduced flow is reported as m_hot_out.
inline void noise_free_channels_into(const LatentTrajectory& latents,
                                     const OperatingConditions& cond,
                                     ObservationSeries& out) {
  cond.validate();
  if (latents.horizon() != cond.horizon)
    throw std::invalid_argument("latent horizon does not match operating conditions");
  out.resize(cond.horizon);
  for (int i = 0; i < cond.horizon; ++i) {
    FluidStream hot = cond.hot_inlet;
    hot.mass_flow = effective_hot_outlet_flow(cond.hot_inlet.mass_flow,
                                              latents.leak_fraction[i]);
    const ExchangerGeometry geom{effective_ua(cond.ua_clean, latents.fouling_factor[i])};
    const SteadyState ss = solve_steady_state(hot, cond.cold_inlet, geom);
    out.t_hot_in[i] = cond.hot_inlet.inlet_temp;
    out.t_hot_out[i] = ss.t_hot_out;
    out.t_cold_in[i] = cond.cold_inlet.inlet_temp;
    out.t_cold_out[i] = ss.t_cold_out;
    out.m_hot_in[i] = cond.hot_inlet.mass_flow;
    out.m_hot_out[i] = hot.mass_flow;
  }
}

inline ObservationSeries noise_free_channels(const LatentTrajectory& latents,
                                             const OperatingConditions& cond) {
  ObservationSeries out;
  noise_free_channels_into(latents, cond, out);
  return out;
}

struct SimulationRecord {
  DegradationTheta theta;
  LatentTrajectory latents;
  ObservationSeries observed;
};

// Full generative pass: latent draws, steady states, additive Gaussian sensor
// noise.  Noise is drawn per step in fixed channel order (temperatures then
// flows) so the stream layout never depends on noise levels.
inline SimulationRecord simulate(const DegradationTheta& theta,
                                 const OperatingConditions& cond, Rng& rng) {
  cond.validate();
  SimulationRecord rec;
  rec.theta = theta;
  rec.latents = sample_trajectory(theta.params, theta.mode, cond.horizon, rng);
  noise_free_channels_into(rec.latents, cond, rec.observed);
  ObservationSeries& obs = rec.observed;
  for (int i = 0; i < cond.horizon; ++i) {
    obs.t_hot_in[i] += cond.noise_temp * rng.normal();
    obs.t_hot_out[i] += cond.noise_temp * rng.normal();
    obs.t_cold_in[i] += cond.noise_temp * rng.normal();
    obs.t_cold_out[i] += cond.noise_temp * rng.normal();
    obs.m_hot_in[i] += cond.noise_flow * rng.normal();
    obs.m_hot_out[i] += cond.noise_flow * rng.normal();
  }
  return rec;
}

}  // namespace hxdiag

#endif  // HXDIAG_OBSERVATION_HPP
