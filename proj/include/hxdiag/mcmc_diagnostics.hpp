#ifndef HXDIAG_MCMC_DIAGNOSTICS_HPP
#define HXDIAG_MCMC_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hxdiag/metrics.hpp"

namespace hxdiag {

struct SplitChainDiag {
  double r_hat = 0.0;
  double ess = 0.0;
};

namespace detail {

// Average ranks (ties averaged), then map through the normal quantile with
// the (r - 3/8) / (S + 1/4) offset.
inline std::vector<double> rank_normalize(const std::vector<double>& pooled) {
  const std::size_t s = pooled.size();
  std::vector<std::size_t> order(s);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> rank(s);
  std::size_t i = 0;
  while (i < s) {
    std::size_t j = i;
    while (j + 1 < s && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }
  std::vector<double> z(s);
  for (std::size_t k = 0; k < s; ++k)
    z[k] = normal_quantile((rank[k] - 0.375) / (static_cast<double>(s) + 0.25));
  return z;
}

inline double sequence_mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// biased autocovariance at lag t (divides by n)
inline double autocovariance(const std::vector<double>& x, double mean, std::size_t t) {
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i + t < n; ++i) acc += (x[i] - mean) * (x[i + t] - mean);
  return acc / static_cast<double>(n);
}

}  // namespace detail

// Rank-normalized split R-hat and bulk effective sample size.  Chains are
// split in half, draws are replaced by normal scores of their pooled ranks,
// and the classic potential scale reduction plus Geyer's initial monotone
// positive sequence estimator run on the transformed sequences.
inline SplitChainDiag rank_normalized_diagnostics(
    const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("diagnostics need at least 2 chains");
  const std::size_t n = chains.front().size();
  if (n < 8) throw std::invalid_argument("diagnostics need at least 8 draws per chain");
  for (const auto& c : chains)
    if (c.size() != n) throw std::invalid_argument("chains must have equal length");

  for (const auto& c : chains) {
    const bool constant = std::all_of(c.begin(), c.end(),
                                      [&](double v) { return v == c.front(); });
    if (constant) throw std::domain_error("degenerate chain: zero variance");
  }

  std::vector<double> pooled;
  pooled.reserve(chains.size() * n);
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const std::vector<double> z = detail::rank_normalize(pooled);

  // split each chain in half (middle draw dropped when odd)
  const std::size_t half = n / 2;
  std::vector<std::vector<double>> seq;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const double* base = z.data() + c * n;
    seq.emplace_back(base, base + half);
    seq.emplace_back(base + (n - half), base + n);
  }
  const std::size_t m = seq.size();
  const double nd = static_cast<double>(half);

  std::vector<double> means(m), vars(m);
  for (std::size_t s = 0; s < m; ++s) {
    means[s] = detail::sequence_mean(seq[s]);
    double ss = 0.0;
    for (double v : seq[s]) ss += (v - means[s]) * (v - means[s]);
    vars[s] = ss / (nd - 1.0);
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  if (!(w > 0.0)) throw std::domain_error("degenerate chains: zero within-sequence variance");
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nd / (static_cast<double>(m) - 1.0);
  const double var_plus = (nd - 1.0) / nd * w + b / nd;

  SplitChainDiag out;
  out.r_hat = std::sqrt(var_plus / w);

  // bulk ESS via paired autocorrelations
  std::vector<double> acov0(m);
  for (std::size_t s = 0; s < m; ++s) acov0[s] = detail::autocovariance(seq[s], means[s], 0);
  auto rho_at = [&](std::size_t t) {
    double acc = 0.0;
    for (std::size_t s = 0; s < m; ++s)
      acc += detail::autocovariance(seq[s], means[s], t);
    const double mean_acov = acc / static_cast<double>(m);
    return 1.0 - (w - mean_acov) / var_plus;
  };

  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < half; t += 2) {
    const double pair = rho_at(t) + rho_at(t + 1);
    if (pair <= 0.0) break;
    const double mono = std::min(pair, prev_pair);
    tau += 2.0 * mono;
    prev_pair = mono;
  }
  tau = std::max(tau, 1e-3);
  const double total = static_cast<double>(m) * nd;
  out.ess = std::min(total / tau, total * std::log10(std::max(total, 10.0)));
  return out;
}

}  // namespace hxdiag

#endif  // HXDIAG_MCMC_DIAGNOSTICS_HPP
