#ifndef HXDIAG_MCMC_HPP
#define HXDIAG_MCMC_HPP

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hxdiag/adaptive_mh.hpp"
#include "hxdiag/mcmc_diagnostics.hpp"
#include "hxdiag/posterior.hpp"
#include "hxdiag/prob_model.hpp"

namespace hxdiag {

// Metropolis-within-Gibbs budget.  The failure mode is drawn from its exact
// conditional each sweep; the four global parameters move as one random-walk
// block; the per-step latents move in sub-blocks.  Step sizes adapt during
// warmup only.
struct ChainConfig {
  int n_chains = 4;
  int n_warmup = 2000;
  int n_samples = 3000;
  double target_accept = 0.3;
  std::uint64_t seed = 0;
  int init_search_draws = 32;   // prior draws screened for the starting state
  int latent_block_size = 10;
  bool parallel_chains = true;

  void validate() const {
    if (n_chains < 1) throw std::invalid_argument("need at least one chain");
    if (n_warmup < 0 || n_samples < 1)
      throw std::invalid_argument("warmup must be >= 0 and samples >= 1");
    if (!(target_accept > 0.0 && target_accept < 1.0))
      throw std::invalid_argument("target_accept must lie in (0, 1)");
    if (init_search_draws < 1) throw std::invalid_argument("init_search_draws must be >= 1");
    if (latent_block_size < 1) throw std::invalid_argument("latent_block_size must be >= 1");
  }
};

// Normalized conditional over the four mode labels given joint log densities.
// Shifting all inputs by a constant leaves the result unchanged.
inline std::array<double, 4> mode_conditional_probs(const std::array<double, 4>& lp) {
  double mx = lp[0];
  for (double v : lp) mx = std::max(mx, v);
  if (!std::isfinite(mx))
    throw std::domain_error("all mode conditionals are -inf");
  std::array<double, 4> p{};
  double total = 0.0;
  for (int z = 0; z < 4; ++z) {
    p[z] = std::exp(lp[z] - mx);
    total += p[z];
  }
  for (double& v : p) v /= total;
  return p;
}

namespace detail {

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// Unconstrained chain state: [v_tau, ln beta_f, ln beta_l, ln lambda,
// logit(u_1..T), ln(J_i / beta_f), ln(dL_i / beta_l)].  In this scale the
// exponential latents decouple from their means and every coordinate is a
// free real.
class TransformedTarget {
 public:
  TransformedTarget(const ObservationSeries& obs, const OperatingConditions& cond,
                    const PriorSpec& prior)
      : obs_(obs), cond_(cond), prior_(prior), horizon_(cond.horizon) {
    lat_.uniform_draws.resize(horizon_);
    lat_.jump_sizes.resize(horizon_);
    lat_.leak_increments.resize(horizon_);
  }

  int horizon() const { return horizon_; }
  int dim() const { return 4 + 3 * horizon_; }
  long evals() const { return evals_; }

  DegradationTheta decode_theta(const std::vector<double>& x, int z) const {
    DegradationTheta theta;
    theta.mode.label = failure_label_from_int(z);
    const double s = stable_logistic(x[0]);
    theta.params.tau = prior_.tau_min + (prior_.tau_max - prior_.tau_min) * s;
    theta.params.beta_f = std::exp(x[1]);
    theta.params.beta_l = std::exp(x[2]);
    theta.params.lambda = std::exp(x[3]);
    theta.params.k_gate = prior_.k_gate;
    theta.params.k_relax = prior_.k_relax;
    return theta;
  }

  std::vector<double> encode(const DegradationTheta& theta, const LatentTrajectory& lat) const {
    std::vector<double> x(dim());
    const double span = prior_.tau_max - prior_.tau_min;
    x[0] = logit((theta.params.tau - prior_.tau_min) / span);
    x[1] = std::log(theta.params.beta_f);
    x[2] = std::log(theta.params.beta_l);
    x[3] = std::log(theta.params.lambda);
    for (int i = 0; i < horizon_; ++i) {
      x[4 + i] = logit(lat.uniform_draws[i]);
      x[4 + horizon_ + i] = std::log(lat.jump_sizes[i]) - x[1];
      x[4 + 2 * horizon_ + i] = std::log(lat.leak_increments[i]) - x[2];
    }
    return x;
  }

  // joint log density in the transformed space (natural joint + log Jacobian)
  double eval(const std::vector<double>& x, int z) {
    ++evals_;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const DegradationTheta theta = decode_theta(x, z);
    const double s = stable_logistic(x[0]);
    if (!(s > 0.0 && s < 1.0)) return neg_inf;
    double jac = std::log(prior_.tau_max - prior_.tau_min) + std::log(s) + std::log1p(-s);
    jac += x[1] + x[2] + x[3];
    for (int i = 0; i < horizon_; ++i) {
      const double q = stable_logistic(x[4 + i]);
      if (!(q > 0.0 && q < 1.0)) return neg_inf;
      lat_.uniform_draws[i] = q;
      jac += std::log(q) + std::log1p(-q);
      const double a = x[4 + horizon_ + i];
      const double b = x[4 + 2 * horizon_ + i];
      if (a > 690.0 || b > 690.0) return neg_inf;
      lat_.jump_sizes[i] = theta.params.beta_f * std::exp(a);
      lat_.leak_increments[i] = theta.params.beta_l * std::exp(b);
      jac += x[1] + a + x[2] + b;
    }
    const double lj = log_joint(theta, lat_, obs_, cond_, prior_, &ws_);
    return lj + jac;
  }

 private:
  const ObservationSeries& obs_;
  const OperatingConditions& cond_;
  const PriorSpec& prior_;
  int horizon_;
  LatentTrajectory lat_;
  JointWorkspace ws_;
  long evals_ = 0;
};

struct ChainResult {
  std::vector<DegradationTheta> draws;
  std::array<long, 4> mode_counts{};
  long evals = 0;
};

inline std::vector<std::vector<int>> latent_blocks(int horizon, int block_size) {
  std::vector<std::vector<int>> blocks;
  for (int array = 0; array < 3; ++array) {
    const int base = 4 + array * horizon;
    for (int start = 0; start < horizon; start += block_size) {
      std::vector<int> idx;
      for (int i = start; i < std::min(start + block_size, horizon); ++i)
        idx.push_back(base + i);
      blocks.push_back(std::move(idx));
    }
  }
  return blocks;
}

inline void run_chain(const ObservationSeries& obs, const OperatingConditions& cond,
                      const PriorSpec& prior, const ChainConfig& cfg, int chain,
                      ChainResult& out) {
  TransformedTarget target(obs, cond, prior);
  Rng rng(derive_stream(cfg.seed, 0x6D63686Eull + static_cast<std::uint64_t>(chain)));
  const int T = cond.horizon;

  // screen a handful of prior draws and start from the best one; this only
  // picks the initial state, the kernel itself is untouched
  std::vector<double> x;
  int z = 0;
  double cur_lp = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < cfg.init_search_draws; ++k) {
    const DegradationTheta cand = sample_prior(prior, rng);
    const LatentTrajectory lat = sample_trajectory(cand.params, cand.mode, T, rng);
    std::vector<double> cx = target.encode(cand, lat);
    const double lp = target.eval(cx, static_cast<int>(cand.mode.label));
    if (lp > cur_lp || x.empty()) {
      cur_lp = lp;
      x = std::move(cx);
      z = static_cast<int>(cand.mode.label);
    }
  }

  AdaptiveScale global_step{std::log(0.15), cfg.target_accept};
  const std::vector<int> global_idx{0, 1, 2, 3};
  const auto blocks = latent_blocks(T, cfg.latent_block_size);
  std::vector<AdaptiveScale> block_steps(blocks.size(),
                                         AdaptiveScale{std::log(0.5), cfg.target_accept});

  out.draws.reserve(cfg.n_samples);
  const int total = cfg.n_warmup + cfg.n_samples;
  for (int iter = 0; iter < total; ++iter) {
    if (iter == cfg.n_warmup) {
      global_step.frozen = true;
      for (auto& s : block_steps) s.frozen = true;
    }

    std::array<double, 4> lp_z;
    for (int cand = 0; cand < 4; ++cand) lp_z[cand] = target.eval(x, cand);
    const auto probs = mode_conditional_probs(lp_z);
    z = rng.categorical(probs);
    cur_lp = lp_z[z];

    auto logpdf = [&](const std::vector<double>& state) { return target.eval(state, z); };
    metropolis_block_step(x, std::span<const int>(global_idx), global_step, logpdf,
                          cur_lp, rng);
    for (std::size_t b = 0; b < blocks.size(); ++b)
      metropolis_block_step(x, std::span<const int>(blocks[b]), block_steps[b], logpdf,
                            cur_lp, rng);

    if (iter >= cfg.n_warmup) {
      out.draws.push_back(target.decode_theta(x, z));
      ++out.mode_counts[z];
    }
  }
  out.evals = target.evals();
}

}  // namespace detail

// Joint-density evaluations a single chain performs: the initial screen plus,
// per sweep, four mode conditionals, one global block and every latent block.
inline long expected_evals_per_chain(const ChainConfig& cfg, int horizon) {
  const long blocks = 3L * ((horizon + cfg.latent_block_size - 1) / cfg.latent_block_size);
  return cfg.init_search_draws +
         static_cast<long>(cfg.n_warmup + cfg.n_samples) * (4 + 1 + blocks);
}

inline PosteriorEnsemble run_mcmc(const ObservationSeries& obs,
                                  const OperatingConditions& cond, const PriorSpec& prior,
                                  const ChainConfig& cfg) {
  cfg.validate();
  cond.validate();
  prior.validate();
  obs.validate();
  if (obs.size() != cond.horizon)
    throw std::invalid_argument("observation length does not match conditions");

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<detail::ChainResult> results(cfg.n_chains);
  if (cfg.parallel_chains && cfg.n_chains > 1) {
    std::vector<std::thread> threads;
    threads.reserve(cfg.n_chains);
    for (int c = 0; c < cfg.n_chains; ++c)
      threads.emplace_back([&, c] { detail::run_chain(obs, cond, prior, cfg, c, results[c]); });
    for (auto& t : threads) t.join();
  } else {
    for (int c = 0; c < cfg.n_chains; ++c)
      detail::run_chain(obs, cond, prior, cfg, c, results[c]);
  }

  PosteriorEnsemble ens;
  for (int c = 0; c < cfg.n_chains; ++c) {
    for (const auto& theta : results[c].draws) {
      ens.thetas.push_back(theta);
      ens.chain_ids.push_back(c);
    }
    for (int zz = 0; zz < 4; ++zz) ens.mode_counts[zz] += results[c].mode_counts[zz];
    ens.simulator_call_count += results[c].evals;
  }
  ens.point_mode = ens.plurality_mode();

  // convergence summaries in natural parameter space; a degenerate chain is
  // reported as an infinite r_hat rather than hidden
  const std::array<const char*, 4> names{"tau", "beta_f", "beta_l", "lambda"};
  for (const char* name : names) {
    std::vector<std::vector<double>> per_chain(cfg.n_chains);
    for (int c = 0; c < cfg.n_chains; ++c) {
      per_chain[c].reserve(cfg.n_samples);
      for (const auto& theta : results[c].draws) {
        const DegradationParams& p = theta.params;
        if (std::string(name) == "tau") per_chain[c].push_back(p.tau);
        else if (std::string(name) == "beta_f") per_chain[c].push_back(p.beta_f);
        else if (std::string(name) == "beta_l") per_chain[c].push_back(p.beta_l);
        else per_chain[c].push_back(p.lambda);
      }
    }
    ParamDiagnostics d;
    if (cfg.n_chains >= 2 && cfg.n_samples >= 8) {
      try {
        const SplitChainDiag sd = rank_normalized_diagnostics(per_chain);
        d.r_hat = sd.r_hat;
        d.ess = sd.ess;
      } catch (const std::domain_error&) {
        d.r_hat = std::numeric_limits<double>::infinity();
        d.ess = 0.0;
      }
    } else {
      d.r_hat = std::numeric_limits<double>::quiet_NaN();
      d.ess = std::numeric_limits<double>::quiet_NaN();
    }
    ens.diagnostics[name] = d;
  }

  const auto t1 = std::chrono::steady_clock::now();
  ens.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();
  return ens;
}

}  // namespace hxdiag

#endif  // HXDIAG_MCMC_HPP
