#ifndef HXDIAG_METRICS_HPP
#define HXDIAG_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace hxdiag {

// Inverse standard normal CDF, Wichura's AS 241 (PPND16), ~1e-15 accurate.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile needs p in (0, 1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
              6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
            1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
          1.3314166789178437745e2) * r + 3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
            5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
          4.2313330701600911252e1) * r + 1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
            3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
          4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
          2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
          5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-9) * r +
              1.84631831751005468180e-6) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

// Linear-interpolation sample quantile (the common "type 7" rule).
inline double sample_quantile(std::span<const double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level must lie in [0, 1]");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double h = q * (s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= s.size()) return s.back();
  const double frac = h - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

// CRPS of an empirical ensemble against a scalar outcome:
//   mean|X - t| - 0.5 E|X - X'|,
// with the pair term over all ordered pairs including self-pairs.  The pair
// sum uses the sorted identity sum_i (2i - N + 1) x_(i), so the whole thing
// is O(N log N).
inline double crps_ensemble(std::span<const double> samples, double truth) {
  const std::size_t n = samples.size();
  if (n == 0) throw std::invalid_argument("crps of empty ensemble");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  double abs_err = 0.0;
  double pair_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    abs_err += std::abs(s[i] - truth);
    pair_sum += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * s[i];
  }
  const double nn = static_cast<double>(n);
  return abs_err / nn - pair_sum / (nn * nn);
}

// 1-D Wasserstein-1 distance between two empirical distributions, computed
// as the integral of |F - G| over the merged support.
inline double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein of empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double wa = 1.0 / static_cast<double>(sa.size());
  const double wb = 1.0 / static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double fa = 0.0, fb = 0.0, dist = 0.0;
  double last = std::min(sa.front(), sb.front());
  while (i < sa.size() || j < sb.size()) {
    double x;
    if (j >= sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      x = sa[i];
    } else {
      x = sb[j];
    }
    dist += std::abs(fa - fb) * (x - last);
    while (i < sa.size() && sa[i] == x) {
      fa += wa;
      ++i;
    }
    while (j < sb.size() && sb[j] == x) {
      fb += wb;
      ++j;
    }
    last = x;
  }
  return dist;
}

// Central credible interval test at the given level (equal tails).
inline bool interval_covers(std::span<const double> samples, double truth, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  const double tail = 0.5 * (1.0 - level);
  const double lo = sample_quantile(samples, tail);
  const double hi = sample_quantile(samples, 1.0 - tail);
  return lo <= truth && truth <= hi;
}

inline double classification_accuracy(std::span<const int> predicted,
                                      std::span<const int> truth) {
  if (predicted.size() != truth.size() || predicted.empty())
    throw std::invalid_argument("prediction and truth must be non-empty and equal length");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (predicted[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

// Kolmogorov-Smirnov statistic of a sample against Uniform(0, 1).
inline double ks_uniform_statistic(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("ks statistic of empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - v[i]));
    d = std::max(d, std::abs(v[i] - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace hxdiag

#endif  // HXDIAG_METRICS_HPP
