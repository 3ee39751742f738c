#ifndef HXDIAG_NPE_HPP
#define HXDIAG_NPE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hxdiag/flow.hpp"
#include "hxdiag/nn.hpp"
#include "hxdiag/observation.hpp"
#include "hxdiag/posterior.hpp"
#include "hxdiag/prob_model.hpp"
#include "hxdiag/summaries.hpp"

namespace hxdiag {

// Bijection between natural degradation parameters and the free 4-dim space
// the flow is trained in: logit-scaled changepoint and log positives.
inline std::array<double, 4> params_to_unconstrained(const DegradationParams& p,
                                                     const PriorSpec& prior) {
  const double span = prior.tau_max - prior.tau_min;
  const double frac = (p.tau - prior.tau_min) / span;
  if (!(frac > 0.0 && frac < 1.0))
    throw std::domain_error("tau outside the open prior support");
  return {std::log(frac) - std::log1p(-frac), std::log(p.beta_f), std::log(p.beta_l),
          std::log(p.lambda)};
}

inline DegradationParams params_from_unconstrained(const std::array<double, 4>& v,
                                                   const PriorSpec& prior) {
  const double span = prior.tau_max - prior.tau_min;
  const double s = std::clamp(stable_logistic(v[0]), 1e-12, 1.0 - 1e-12);
  DegradationParams p;
  p.tau = prior.tau_min + span * s;
  p.beta_f = std::exp(v[1]);
  p.beta_l = std::exp(v[2]);
  p.lambda = std::exp(v[3]);
  p.k_gate = prior.k_gate;
  p.k_relax = prior.k_relax;
  return p;
}

// Column-wise affine whitening.  Constant columns keep unit scale so they
// pass through unchanged instead of dividing by zero.
struct Standardizer {
  Eigen::VectorXd mean, sd;

  void fit(const nn::Matrix& x, int rows) {
    if (rows < 2 || rows > x.rows()) throw std::invalid_argument("bad standardizer fit range");
    mean = x.topRows(rows).colwise().mean();
    sd.resize(x.cols());
    for (int j = 0; j < x.cols(); ++j) {
      const double var =
          (x.col(j).head(rows).array() - mean(j)).square().sum() / static_cast<double>(rows);
      sd(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
  }

  nn::Matrix apply(const nn::Matrix& x) const {
    nn::Matrix out = x;
    out.rowwise() -= mean.transpose();
    out.array().rowwise() /= sd.transpose().array();
    return out;
  }

  Eigen::VectorXd apply_vec(const Eigen::VectorXd& x) const {
    return ((x - mean).array() / sd.array()).matrix();
  }

  nn::Matrix invert(const nn::Matrix& x) const {
    nn::Matrix out = x;
    out.array().rowwise() *= sd.transpose().array();
    out.rowwise() += mean.transpose();
    return out;
  }
};

// Prior-predictive training corpus.  Each simulation gets its own derived RNG
// stream, so the set is reproducible and insensitive to generation order.
struct TrainingSet {
  nn::Matrix params;      // n x 4, unconstrained scale
  std::vector<int> labels;
  nn::Matrix summaries;   // n x 25
  PriorSpec prior;
  int horizon = 0;
};

inline TrainingSet generate_training_set(int n, const PriorSpec& prior,
                                         const OperatingConditions& cond,
                                         std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("training set needs at least 10 simulations");
  prior.validate();
  cond.validate();
  TrainingSet ts;
  ts.prior = prior;
  ts.horizon = cond.horizon;
  ts.params.resize(n, 4);
  ts.summaries.resize(n, kSummaryDim);
  ts.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(i)));
    const DegradationTheta theta = sample_prior(prior, rng);
    const SimulationRecord rec = simulate(theta, cond, rng);
    const std::vector<double> s = summarize(rec.observed);
    for (int j = 0; j < kSummaryDim; ++j) ts.summaries(i, j) = s[j];
    const auto v = params_to_unconstrained(theta.params, prior);
    for (int j = 0; j < 4; ++j) ts.params(i, j) = v[j];
    ts.labels[i] = static_cast<int>(theta.mode.label);
  }
  return ts;
}

struct TrainConfig {
  double learning_rate = 5e-4;
  int batch_size = 256;
  int max_epochs = 300;
  int patience = 20;           // epochs without validation improvement
  double val_fraction = 0.1;
  int hidden = 50;
  int n_layers = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (batch_size < 1 || max_epochs < 1 || patience < 1 || hidden < 1 || n_layers < 1)
      throw std::invalid_argument("training sizes must be positive");
    if (!(val_fraction > 0.0 && val_fraction < 0.5))
      throw std::invalid_argument("val_fraction must lie in (0, 0.5)");
  }
};

struct TrainingMeta {
  int epochs_run = 0;
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  double best_val_flow_nll = 0.0;
  double best_val_ce = 0.0;
  long n_sims = 0;
  double train_seconds = 0.0;  // measurement; not persisted in checkpoints
};

struct TrainedPosterior {
  SplineFlow flow;
  nn::Mlp classifier;
  Standardizer sum_std, par_std;
  PriorSpec prior;
  int horizon = 0;
  TrainingMeta meta;
};

namespace detail {

inline double validation_loss(const SplineFlow& flow, const nn::Mlp& classifier,
                              const nn::Matrix& p, const nn::Matrix& c,
                              const std::vector<int>& labels, double* nll_out,
                              double* ce_out) {
  const Eigen::VectorXd lp = flow.log_prob_batch(p, c);
  const double nll = -lp.mean();
  const nn::Matrix logits = classifier.forward(c);
  const double ce = nn::softmax_cross_entropy(logits, labels);
  if (nll_out) *nll_out = nll;
  if (ce_out) *ce_out = ce;
  return nll + ce;
}

}  // namespace detail

// Joint training of the conditional flow (negative log likelihood) and the
// mode classifier (cross entropy).  The two parameter sets are disjoint, so
// per-component Adam steps implement the summed loss exactly.  Keeps the
// best-validation snapshot and stops after `patience` stale epochs.
inline TrainedPosterior train_npe(const TrainingSet& ts, const TrainConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(ts.params.rows());
  const int n_train = static_cast<int>(std::floor((1.0 - cfg.val_fraction) * n));
  const int n_val = n - n_train;
  if (n_train < cfg.batch_size || n_val < 1)
    throw std::invalid_argument("training set too small for the requested split");

  const auto t0 = std::chrono::steady_clock::now();
  TrainedPosterior tp;
  tp.prior = ts.prior;
  tp.horizon = ts.horizon;
  tp.sum_std.fit(ts.summaries, n_train);
  tp.par_std.fit(ts.params, n_train);

  const nn::Matrix c_all = tp.sum_std.apply(ts.summaries);
  const nn::Matrix p_all = tp.par_std.apply(ts.params);
  const nn::Matrix c_val = c_all.bottomRows(n_val);
  const nn::Matrix p_val = p_all.bottomRows(n_val);
  const std::vector<int> labels_val(ts.labels.begin() + n_train, ts.labels.end());

  Rng rng(derive_stream(cfg.seed, 0x6E7065ull));
  tp.flow = SplineFlow::make(kSummaryDim, cfg.n_layers, cfg.hidden, rng);
  tp.classifier = nn::Mlp::make({kSummaryDim, cfg.hidden, cfg.hidden, 4}, rng, false);

  SplineFlow flow_grads = SplineFlow::zeros_like(tp.flow);
  nn::Mlp cls_grads = nn::Mlp::zeros_like(tp.classifier);
  std::vector<nn::AdamState> flow_adam;
  for (const auto& layer : tp.flow.layers())
    flow_adam.push_back(nn::AdamState::zeros_like(layer.conditioner));
  nn::AdamState cls_adam = nn::AdamState::zeros_like(tp.classifier);

  SplineFlow best_flow = tp.flow;
  nn::Mlp best_cls = tp.classifier;
  TrainingMeta meta;
  meta.n_sims = n;

  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  int stale = 0;
  SplineFlow::BatchCache cache;
  nn::Mlp::Cache cls_cache;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Fisher-Yates with the training RNG keeps epochs reproducible
    for (int i = n_train - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);

    for (int start = 0; start < n_train; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n_train - start);
      nn::Matrix pb(bs, 4), cb(bs, kSummaryDim);
      std::vector<int> lb(bs);
      for (int i = 0; i < bs; ++i) {
        const int r = order[start + i];
        pb.row(i) = p_all.row(r);
        cb.row(i) = c_all.row(r);
        lb[i] = ts.labels[r];
      }

      tp.flow.log_prob_batch(pb, cb, &cache);
      const Eigen::VectorXd dlp =
          Eigen::VectorXd::Constant(bs, -1.0 / static_cast<double>(bs));
      for (auto& layer : flow_grads.layers()) layer.conditioner.set_zero();
      tp.flow.backward_batch(cache, cb, dlp, flow_grads);
      for (std::size_t l = 0; l < tp.flow.layers().size(); ++l)
        nn::adam_step(tp.flow.layers()[l].conditioner, flow_grads.layers()[l].conditioner,
                      flow_adam[l], cfg.learning_rate);

      const nn::Matrix logits = tp.classifier.forward(cb, &cls_cache);
      nn::Matrix dlogits;
      nn::softmax_cross_entropy(logits, lb, &dlogits);
      cls_grads.set_zero();
      tp.classifier.backward(cls_cache, dlogits, cls_grads);
      nn::adam_step(tp.classifier, cls_grads, cls_adam, cfg.learning_rate);
    }

    double val_nll = 0.0, val_ce = 0.0;
    const double val_loss = detail::validation_loss(tp.flow, tp.classifier, p_val, c_val,
                                                    labels_val, &val_nll, &val_ce);
    meta.epochs_run = epoch;
    if (val_loss < meta.best_val_loss) {
      meta.best_val_loss = val_loss;
      meta.best_val_flow_nll = val_nll;
      meta.best_val_ce = val_ce;
      meta.best_epoch = epoch;
      best_flow = tp.flow;
      best_cls = tp.classifier;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      break;
    }
  }

  tp.flow = best_flow;
  tp.classifier = best_cls;
  const auto t1 = std::chrono::steady_clock::now();
  meta.train_seconds = std::chrono::duration<double>(t1 - t0).count();
  tp.meta = meta;
  return tp;
}

// Amortized posterior call: one summary pass, one classifier pass, n flow
// draws.  No simulator runs happen here.
inline PosteriorEnsemble npe_infer(const TrainedPosterior& tp, const ObservationSeries& obs,
                                   int n_draws, std::uint64_t seed) {
  if (n_draws < 1) throw std::invalid_argument("n_draws must be positive");
  obs.validate();
  if (obs.size() != tp.horizon)
    throw std::invalid_argument("observation length does not match the trained horizon");
  const auto t0 = std::chrono::steady_clock::now();

  const std::vector<double> s = summarize(obs);
  Eigen::VectorXd raw(kSummaryDim);
  for (int j = 0; j < kSummaryDim; ++j) raw(j) = s[j];
  const Eigen::VectorXd ctx = tp.sum_std.apply_vec(raw);

  const nn::Matrix logits = tp.classifier.forward(ctx.transpose());
  std::array<double, 4> probs;
  {
    const double mx = logits.row(0).maxCoeff();
    double total = 0.0;
    for (int z = 0; z < 4; ++z) {
      probs[z] = std::exp(logits(0, z) - mx);
      total += probs[z];
    }
    for (double& v : probs) v /= total;
  }

  Rng rng(derive_stream(seed, 0x696E66ull));
  nn::Matrix draws = tp.flow.sample_batch(ctx, n_draws, rng);
  const nn::Matrix nat = tp.par_std.invert(draws);

  PosteriorEnsemble ens;
  ens.thetas.resize(n_draws);
  ens.chain_ids.assign(n_draws, 0);
  for (int i = 0; i < n_draws; ++i) {
    const std::array<double, 4> v{nat(i, 0), nat(i, 1), nat(i, 2), nat(i, 3)};
    ens.thetas[i].params = params_from_unconstrained(v, tp.prior);
    const int z = rng.categorical(probs);
    ens.thetas[i].mode.label = failure_label_from_int(z);
    ++ens.mode_counts[z];
  }
  int argmax = 0;
  for (int z = 1; z < 4; ++z)
    if (probs[z] > probs[argmax]) argmax = z;
  ens.point_mode = failure_label_from_int(argmax);
  ens.simulator_call_count = 0;

  const auto t1 = std::chrono::steady_clock::now();
  ens.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();
  return ens;
}

}  // namespace hxdiag

#endif  // HXDIAG_NPE_HPP
