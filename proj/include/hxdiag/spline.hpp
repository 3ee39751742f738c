#ifndef HXDIAG_SPLINE_HPP
#define HXDIAG_SPLINE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace hxdiag::rqs {

inline constexpr int kBins = 8;
inline constexpr double kTailBound = 5.0;
inline constexpr double kMinBinWidth = 1e-3;
inline constexpr double kMinBinHeight = 1e-3;
inline constexpr double kMinDerivative = 1e-3;
inline constexpr int kParamsPerDim = 3 * kBins - 1;

inline double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// Offset added to the raw derivative parameters so that zero raw input decodes
// to unit knot derivatives, making a freshly zero-initialized spline the
// identity map on [-B, B].
inline double derivative_shift() {
  static const double shift = std::log(std::exp(1.0 - kMinDerivative) - 1.0);
  return shift;
}

// Monotone rational-quadratic spline on [-B, B], identity outside.  Knot
// widths and heights come from softmaxed raw parameters with a minimum bin
// size; interior derivatives from a shifted softplus; boundary derivatives
// are pinned to 1 so the map is C1 at the tails.
struct Decoded {
  std::array<double, kBins + 1> xk, yk, d;
  std::array<double, kBins> sw, sh;         // softmax probabilities
  std::array<double, kBins + 1> pw, ph;     // cumulative probabilities
  std::array<double, kBins - 1> sd;         // sigmoid of shifted derivative raws
};

inline Decoded decode(const double* raw) {
  Decoded dec;
  const double b = kTailBound;

  auto fill = [&](const double* r, double min_bin, std::array<double, kBins>& sm,
                  std::array<double, kBins + 1>& cum, std::array<double, kBins + 1>& knots) {
    double mx = r[0];
    for (int i = 1; i < kBins; ++i) mx = std::max(mx, r[i]);
    double total = 0.0;
    for (int i = 0; i < kBins; ++i) {
      sm[i] = std::exp(r[i] - mx);
      total += sm[i];
    }
    for (int i = 0; i < kBins; ++i) sm[i] /= total;
    const double free_span = 1.0 - kBins * min_bin;
    cum[0] = 0.0;
    for (int i = 0; i < kBins; ++i) cum[i + 1] = cum[i] + sm[i];
    for (int m = 0; m <= kBins; ++m)
      knots[m] = -b + 2.0 * b * (min_bin * m + free_span * cum[m]);
    knots[kBins] = b;
  };
  fill(raw, kMinBinWidth, dec.sw, dec.pw, dec.xk);
  fill(raw + kBins, kMinBinHeight, dec.sh, dec.ph, dec.yk);

  dec.d[0] = 1.0;
  dec.d[kBins] = 1.0;
  for (int k = 1; k < kBins; ++k) {
    const double arg = raw[2 * kBins + (k - 1)] + derivative_shift();
    dec.d[k] = kMinDerivative + softplus(arg);
    dec.sd[k - 1] = sigmoid(arg);
  }
  return dec;
}

struct Eval {
  double y = 0.0;
  double logdet = 0.0;
  int bin = -1;  // -1 marks the identity tails
  double xi = 0.0, s = 0.0, w = 0.0, h = 0.0;
  double den = 0.0, num = 0.0, m = 0.0;
};

inline int find_bin(const std::array<double, kBins + 1>& knots, double v) {
  int k = 0;
  while (k + 1 < kBins && v >= knots[k + 1]) ++k;
  return k;
}

inline Eval forward(const Decoded& dec, double x) {
  Eval ev;
  if (x <= -kTailBound || x >= kTailBound) {
    ev.y = x;
    return ev;
  }
  const int k = find_bin(dec.xk, x);
  const double w = dec.xk[k + 1] - dec.xk[k];
  const double h = dec.yk[k + 1] - dec.yk[k];
  const double s = h / w;
  const double xi = (x - dec.xk[k]) / w;
  const double u = xi * (1.0 - xi);
  const double d0 = dec.d[k], d1 = dec.d[k + 1];
  const double den = s + (d1 + d0 - 2.0 * s) * u;
  const double num = s * xi * xi + d0 * u;
  const double m = d1 * xi * xi + 2.0 * s * u + d0 * (1.0 - xi) * (1.0 - xi);
  ev.y = dec.yk[k] + h * num / den;
  ev.logdet = 2.0 * std::log(s) + std::log(m) - 2.0 * std::log(den);
  ev.bin = k;
  ev.xi = xi;
  ev.s = s;
  ev.w = w;
  ev.h = h;
  ev.den = den;
  ev.num = num;
  ev.m = m;
  return ev;
}

// Closed-form inverse on the same bin structure.
inline double inverse(const Decoded& dec, double y) {
  if (y <= -kTailBound || y >= kTailBound) return y;
  const int k = find_bin(dec.yk, y);
  const double w = dec.xk[k + 1] - dec.xk[k];
  const double h = dec.yk[k + 1] - dec.yk[k];
  const double s = h / w;
  const double d0 = dec.d[k], d1 = dec.d[k + 1];
  const double yr = y - dec.yk[k];
  const double t = d1 + d0 - 2.0 * s;
  const double qa = h * (s - d0) + yr * t;
  const double qb = h * d0 - yr * t;
  const double qc = -s * yr;
  const double disc = std::max(qb * qb - 4.0 * qa * qc, 0.0);
  const double xi = 2.0 * qc / (-qb - std::sqrt(disc));
  return dec.xk[k] + w * std::clamp(xi, 0.0, 1.0);
}

// Reverse-mode sensitivities.  gy and gl are the upstream gradients w.r.t.
// the output value and the log-derivative; dx receives the input gradient and
// draw_grad the 3K-1 raw parameter gradients (accumulated).
inline void backward(const Decoded& dec, const Eval& ev, double gy, double gl,
                     double& dx, double* draw_grad) {
  if (ev.bin < 0) {
    dx += gy;
    return;
  }
  const int k = ev.bin;
  const double xi = ev.xi, s = ev.s, w = ev.w, h = ev.h;
  const double den = ev.den, num = ev.num, m = ev.m;
  const double d0 = dec.d[k], d1 = dec.d[k + 1];
  const double u = xi * (1.0 - xi);
  const double up = 1.0 - 2.0 * xi;
  const double den2 = den * den;

  const double dnum_dxi = 2.0 * s * xi + d0 * up;
  const double dden_dxi = (d1 + d0 - 2.0 * s) * up;
  const double dm_dxi = 2.0 * d1 * xi + 2.0 * s * up - 2.0 * d0 * (1.0 - xi);

  const double y_xi = h * (dnum_dxi * den - num * dden_dxi) / den2;
  const double y_s = h * (xi * xi * den - num * (1.0 - 2.0 * u)) / den2;
  const double y_d0 = h * u * (den - num) / den2;
  const double y_d1 = -h * num * u / den2;
  const double y_h = num / den;

  const double l_xi = dm_dxi / m - 2.0 * dden_dxi / den;
  const double l_s = 2.0 / s + 2.0 * u / m - 2.0 * (1.0 - 2.0 * u) / den;
  const double l_d0 = (1.0 - xi) * (1.0 - xi) / m - 2.0 * u / den;
  const double l_d1 = xi * xi / m - 2.0 * u / den;

  const double g_xi = gy * y_xi + gl * l_xi;
  const double g_s = gy * y_s + gl * l_s;
  const double g_d0 = gy * y_d0 + gl * l_d0;
  const double g_d1 = gy * y_d1 + gl * l_d1;
  const double g_h = gy * y_h;

  dx += g_xi / w;
  const double da = g_xi * (xi - 1.0) / w + g_s * (s / w);   // left x-knot
  const double db = -g_xi * xi / w - g_s * (s / w);          // right x-knot
  const double dc = gy - g_h - g_s / w;                      // left y-knot
  const double de = g_h + g_s / w;                           // right y-knot

  const double cw = 1.0 - kBins * kMinBinWidth;
  const double ch = 1.0 - kBins * kMinBinHeight;
  for (int j = 0; j < kBins; ++j) {
    const double wa = (j < k ? 1.0 : 0.0) - dec.pw[k];
    const double wb = (j < k + 1 ? 1.0 : 0.0) - dec.pw[k + 1];
    draw_grad[j] += 2.0 * kTailBound * cw * dec.sw[j] * (da * wa + db * wb);
    const double ha = (j < k ? 1.0 : 0.0) - dec.ph[k];
    const double hb = (j < k + 1 ? 1.0 : 0.0) - dec.ph[k + 1];
    draw_grad[kBins + j] += 2.0 * kTailBound * ch * dec.sh[j] * (dc * ha + de * hb);
  }
  if (k >= 1) draw_grad[2 * kBins + (k - 1)] += g_d0 * dec.sd[k - 1];
  if (k + 1 <= kBins - 1) draw_grad[2 * kBins + k] += g_d1 * dec.sd[k];
}

}  // namespace hxdiag::rqs

#endif  // HXDIAG_SPLINE_HPP
