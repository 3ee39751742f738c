#ifndef HXDIAG_NPE_IO_HPP
#define HXDIAG_NPE_IO_HPP

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hxdiag/npe.hpp"

namespace hxdiag {

namespace detail {

inline nlohmann::json mlp_to_json(const nn::Mlp& m) {
  nlohmann::json j;
  std::vector<int> dims{m.in_dim()};
  for (const auto& w : m.w) dims.push_back(static_cast<int>(w.cols()));
  j["dims"] = dims;
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    std::vector<double> flat;
    flat.reserve(m.w[l].size());
    for (int i = 0; i < m.w[l].rows(); ++i)
      for (int k = 0; k < m.w[l].cols(); ++k) flat.push_back(m.w[l](i, k));
    j["weights"].push_back(flat);
    j["biases"].push_back(std::vector<double>(m.b[l].data(), m.b[l].data() + m.b[l].size()));
  }
  return j;
}

inline nn::Mlp mlp_from_json(const nlohmann::json& j) {
  const std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  if (dims.size() < 2) throw std::runtime_error("checkpoint mlp has no layers");
  nn::Mlp m;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto flat = j.at("weights").at(l).get<std::vector<double>>();
    const auto bias = j.at("biases").at(l).get<std::vector<double>>();
    if (flat.size() != static_cast<std::size_t>(dims[l]) * dims[l + 1] ||
        bias.size() != static_cast<std::size_t>(dims[l + 1]))
      throw std::runtime_error("checkpoint mlp shape mismatch");
    nn::Matrix w(dims[l], dims[l + 1]);
    for (int i = 0; i < dims[l]; ++i)
      for (int k = 0; k < dims[l + 1]; ++k) w(i, k) = flat[i * dims[l + 1] + k];
    m.w.push_back(std::move(w));
    m.b.push_back(Eigen::Map<const nn::Vector>(bias.data(), dims[l + 1]));
  }
  return m;
}

inline nlohmann::json standardizer_to_json(const Standardizer& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"sd", std::vector<double>(s.sd.data(), s.sd.data() + s.sd.size())}};
}

inline Standardizer standardizer_from_json(const nlohmann::json& j) {
  Standardizer s;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("sd").get<std::vector<double>>();
  if (mean.size() != sd.size() || mean.empty())
    throw std::runtime_error("checkpoint standardizer shape mismatch");
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
  s.sd = Eigen::Map<const Eigen::VectorXd>(sd.data(), sd.size());
  return s;
}

inline nlohmann::json prior_to_json(const PriorSpec& p) {
  return {{"mode_probs", p.mode_probs},
          {"tau_min", p.tau_min},
          {"tau_max", p.tau_max},
          {"log_beta_f_loc", p.log_beta_f_loc},
          {"log_beta_f_scale", p.log_beta_f_scale},
          {"log_beta_l_loc", p.log_beta_l_loc},
          {"log_beta_l_scale", p.log_beta_l_scale},
          {"log_lambda_loc", p.log_lambda_loc},
          {"log_lambda_scale", p.log_lambda_scale},
          {"k_gate", p.k_gate},
          {"k_relax", p.k_relax}};
}

inline PriorSpec prior_from_json(const nlohmann::json& j) {
  PriorSpec p;
  p.mode_probs = j.at("mode_probs").get<std::array<double, 4>>();
  p.tau_min = j.at("tau_min").get<double>();
  p.tau_max = j.at("tau_max").get<double>();
  p.log_beta_f_loc = j.at("log_beta_f_loc").get<double>();
  p.log_beta_f_scale = j.at("log_beta_f_scale").get<double>();
  p.log_beta_l_loc = j.at("log_beta_l_loc").get<double>();
  p.log_beta_l_scale = j.at("log_beta_l_scale").get<double>();
  p.log_lambda_loc = j.at("log_lambda_loc").get<double>();
  p.log_lambda_scale = j.at("log_lambda_scale").get<double>();
  p.k_gate = j.at("k_gate").get<double>();
  p.k_relax = j.at("k_relax").get<double>();
  p.validate();
  return p;
}

}  // namespace detail

// Checkpoint layout "hxdiag-npe-v1".  Wall-clock timings are deliberately
// left out so a rerun with the same seed writes identical bytes.
inline nlohmann::json checkpoint_to_json(const TrainedPosterior& tp) {
  nlohmann::json j;
  j["format"] = "hxdiag-npe-v1";
  j["horizon"] = tp.horizon;
  j["prior"] = detail::prior_to_json(tp.prior);
  j["summary_standardizer"] = detail::standardizer_to_json(tp.sum_std);
  j["param_standardizer"] = detail::standardizer_to_json(tp.par_std);
  nlohmann::json flow;
  flow["ctx_dim"] = tp.flow.ctx_dim();
  flow["n_layers"] = tp.flow.n_layers();
  for (const auto& layer : tp.flow.layers())
    flow["layers"].push_back(detail::mlp_to_json(layer.conditioner));
  j["flow"] = flow;
  j["classifier"] = detail::mlp_to_json(tp.classifier);
  j["meta"] = {{"epochs_run", tp.meta.epochs_run},
               {"best_epoch", tp.meta.best_epoch},
               {"best_val_loss", tp.meta.best_val_loss},
               {"best_val_flow_nll", tp.meta.best_val_flow_nll},
               {"best_val_ce", tp.meta.best_val_ce},
               {"n_sims", tp.meta.n_sims}};
  return j;
}

inline TrainedPosterior checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != std::string("hxdiag-npe-v1"))
    throw std::runtime_error("not a recognized posterior checkpoint");
  TrainedPosterior tp;
  tp.horizon = j.at("horizon").get<int>();
  tp.prior = detail::prior_from_json(j.at("prior"));
  tp.sum_std = detail::standardizer_from_json(j.at("summary_standardizer"));
  tp.par_std = detail::standardizer_from_json(j.at("param_standardizer"));

  const auto& jf = j.at("flow");
  const int ctx_dim = jf.at("ctx_dim").get<int>();
  const int n_layers = jf.at("n_layers").get<int>();
  if (jf.at("layers").size() != static_cast<std::size_t>(n_layers))
    throw std::runtime_error("checkpoint flow layer count mismatch");
  std::vector<nn::Mlp> conds;
  int hidden = 1;
  for (const auto& jl : jf.at("layers")) {
    conds.push_back(detail::mlp_from_json(jl));
    hidden = static_cast<int>(conds.back().w.front().cols());
    if (conds.back().in_dim() != 2 + ctx_dim ||
        conds.back().out_dim() != 2 * rqs::kParamsPerDim)
      throw std::runtime_error("checkpoint conditioner shape mismatch");
  }
  Rng scratch(0);
  tp.flow = SplineFlow::make(ctx_dim, n_layers, hidden, scratch);
  for (int l = 0; l < n_layers; ++l) tp.flow.layers()[l].conditioner = std::move(conds[l]);

  tp.classifier = detail::mlp_from_json(j.at("classifier"));
  const auto& jm = j.at("meta");
  tp.meta.epochs_run = jm.at("epochs_run").get<int>();
  tp.meta.best_epoch = jm.at("best_epoch").get<int>();
  tp.meta.best_val_loss = jm.at("best_val_loss").get<double>();
  tp.meta.best_val_flow_nll = jm.at("best_val_flow_nll").get<double>();
  tp.meta.best_val_ce = jm.at("best_val_ce").get<double>();
  tp.meta.n_sims = jm.at("n_sims").get<long>();
  return tp;
}

inline void save_checkpoint(const TrainedPosterior& tp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out << checkpoint_to_json(tp).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

inline TrainedPosterior load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  return checkpoint_from_json(j);
}

}  // namespace hxdiag

#endif  // HXDIAG_NPE_IO_HPP
