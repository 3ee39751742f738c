#ifndef HXDIAG_THERMAL_HPP
#define HXDIAG_THERMAL_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hxdiag {

// One side of the exchanger at its inlet.
struct FluidStream {
  double mass_flow;      // kg/s
  double specific_heat;  // J/(kg K)
  double inlet_temp;     // K

  void validate() const {
    if (!(mass_flow > 0.0)) throw std::invalid_argument("mass_flow must be positive");
    if (!(specific_heat > 0.0)) throw std::invalid_argument("specific_heat must be positive");
    if (!(inlet_temp > 0.0)) throw std::invalid_argument("inlet_temp must be positive (kelvin)");
  }

  double capacity_rate() const { return mass_flow * specific_heat; }
};

struct ExchangerGeometry {
  double ua;  // overall conductance, W/K

  void validate() const {
    if (!(ua >= 0.0)) throw std::invalid_argument("ua must be non-negative");
  }
};

struct SteadyState {
  double t_hot_out;
  double t_cold_out;
  double heat_rate;       // W
  double effectiveness;   // dimensionless, in [0, 1)
};

// Counterflow effectiveness.  The r -> 1 limit NTU/(1+NTU) takes over inside
// a 1e-9 window around r = 1 where the general expression turns 0/0.
inline double effectiveness_counterflow(double ntu, double r) {
  if (!(ntu >= 0.0)) throw std::domain_error("ntu must be non-negative");
  if (!(r >= 0.0 && r <= 1.0)) throw std::domain_error("capacity ratio must lie in [0, 1]");
  if (std::abs(1.0 - r) < 1e-9) return ntu / (1.0 + ntu);
  const double e = std::exp(-ntu * (1.0 - r));
  return (1.0 - e) / (1.0 - r * e);
}

inline SteadyState solve_steady_state(const FluidStream& hot, const FluidStream& cold,
                                      const ExchangerGeometry& geom) {
  hot.validate();
  cold.validate();
  geom.validate();
  if (hot.inlet_temp < cold.inlet_temp)
    throw std::domain_error("hot inlet must not be colder than cold inlet");

  const double c_hot = hot.capacity_rate();
  const double c_cold = cold.capacity_rate();
  const double c_min = std::min(c_hot, c_cold);
  const double c_max = std::max(c_hot, c_cold);

  const double ntu = geom.ua / c_min;
  const double r = c_min / c_max;
  const double eps = effectiveness_counterflow(ntu, r);
  const double q = eps * c_min * (hot.inlet_temp - cold.inlet_temp);

  SteadyState out;
  out.effectiveness = eps;
  out.heat_rate = q;
  out.t_hot_out = hot.inlet_temp - q / c_hot;
  out.t_cold_out = cold.inlet_temp + q / c_cold;
  return out;
}

// Relative mismatch between Q and UA * LMTD.  A solver bug shows up here long
// before it shows up in posterior quality, so this stays cheap and strict.
inline double lmtd_residual(const SteadyState& state, const FluidStream& hot,
                            const FluidStream& cold, const ExchangerGeometry& geom) {
  if (!(state.heat_rate > 0.0))
    throw std::domain_error("lmtd residual needs a strictly positive heat rate");
  const double dt_a = hot.inlet_temp - state.t_cold_out;   // hot-inlet end
  const double dt_b = state.t_hot_out - cold.inlet_temp;   // cold-inlet end
  if (!(dt_a > 0.0) || !(dt_b > 0.0))
    throw std::domain_error("temperature pinch collapsed; lmtd undefined");
  const double scale = std::max(dt_a, dt_b);
  double lm;
  if (std::abs(dt_a - dt_b) <= 1e-9 * scale) {
    lm = 0.5 * (dt_a + dt_b);  // equal-difference limit
  } else {
    lm = (dt_a - dt_b) / std::log(dt_a / dt_b);
  }
  return std::abs(state.heat_rate - geom.ua * lm) / state.heat_rate;
}

}  // namespace hxdiag

#endif  // HXDIAG_THERMAL_HPP
