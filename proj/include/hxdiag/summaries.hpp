#ifndef HXDIAG_SUMMARIES_HPP
#define HXDIAG_SUMMARIES_HPP

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "hxdiag/observation.hpp"

namespace hxdiag {

inline constexpr int kSummarySignals = 5;
inline constexpr int kSummaryFeatures = 5;
inline constexpr int kSummaryDim = kSummarySignals * kSummaryFeatures;

// Five scalar features of one signal: mean, population std, late-minus-early
// window mean (windows of ceil(T/4) steps), range, least-squares slope
// against the step index.
inline std::array<double, kSummaryFeatures> signal_features(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n < 4) throw std::invalid_argument("signal needs at least 4 samples");

  double sum = 0.0;
  double lo = x[0], hi = x[0];
  for (double v : x) {
    sum += v;
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  const double mean = sum / n;

  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);

  const int w = (n + 3) / 4;  // ceil(n / 4)
  double early = 0.0, late = 0.0;
  for (int i = 0; i < w; ++i) early += x[i];
  for (int i = n - w; i < n; ++i) late += x[i];
  const double change = late / w - early / w;

  // slope of the least-squares line over indices 0..n-1
  const double idx_mean = 0.5 * (n - 1);
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < n; ++i) {
    const double dx = i - idx_mean;
    sxy += dx * (x[i] - mean);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;

  return {mean, sd, change, hi - lo, slope};
}

// 25-dim summary: features of (hot dT, cold dT, flow loss, t_hot_out,
// t_cold_out), in that signal order, features contiguous per signal.
inline std::vector<double> summarize(const ObservationSeries& obs) {
  obs.validate();
  const int n = obs.size();
  if (n < 4) throw std::invalid_argument("series needs at least 4 samples");

  std::vector<double> hot_dt(n), cold_dt(n), flow_loss(n);
  for (int i = 0; i < n; ++i) {
    hot_dt[i] = obs.t_hot_in[i] - obs.t_hot_out[i];
    cold_dt[i] = obs.t_cold_out[i] - obs.t_cold_in[i];
    flow_loss[i] = obs.m_hot_in[i] - obs.m_hot_out[i];
  }

  const std::array<std::span<const double>, kSummarySignals> signals = {
      std::span<const double>(hot_dt), std::span<const double>(cold_dt),
      std::span<const double>(flow_loss), std::span<const double>(obs.t_hot_out),
      std::span<const double>(obs.t_cold_out)};

  std::vector<double> out;
  out.reserve(kSummaryDim);
  for (const auto& sig : signals) {
    const auto f = signal_features(sig);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

}  // namespace hxdiag

#endif  // HXDIAG_SUMMARIES_HPP
