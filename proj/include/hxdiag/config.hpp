#ifndef HXDIAG_CONFIG_HPP
#define HXDIAG_CONFIG_HPP

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hxdiag/mcmc.hpp"
#include "hxdiag/npe.hpp"
#include "hxdiag/observation.hpp"
#include "hxdiag/scenarios.hpp"

namespace hxdiag {

struct NpeSettings {
  int n_train_sims = 50000;
  int n_posterior_draws = 2000;
  TrainConfig train;
};

struct BenchSettings {
  int n_realizations = 0;  // 0 means: use each scenario's own count
  int n_timing_calls = 20;
};

struct ExperimentConfig {
  OperatingConditions conditions;
  PriorSpec prior;
  ChainConfig mcmc;
  NpeSettings npe;
  BenchSettings bench;
  std::vector<ScenarioSpec> scenarios = default_scenarios();

  void validate() const {
    conditions.validate();
    prior.validate();
    mcmc.validate();
    npe.train.validate();
    if (npe.n_train_sims < 100) throw std::invalid_argument("npe train_sims too small");
    if (npe.n_posterior_draws < 1)
      throw std::invalid_argument("posterior draw count must be positive");
    if (scenarios.empty()) throw std::invalid_argument("at least one scenario required");
  }
};

namespace ini {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

using Sections = std::map<std::string, std::map<std::string, std::string>>;

inline Sections parse(std::istream& in) {
  Sections out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    if (section.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": key outside any section");
    out[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad number '" + v + "'");
  }
}

inline int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw std::invalid_argument("config key '" + key + "' must be integer");
  return static_cast<int>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "': bad boolean '" + v + "'");
}

inline std::optional<double> to_opt_double(const std::string& key, const std::string& v) {
  if (v == "-") return std::nullopt;
  return to_double(key, v);
}

}  // namespace ini

// scenario value layout: mode tau beta_f beta_l lambda n_realizations
inline ScenarioSpec parse_scenario_line(const std::string& name, const std::string& value) {
  std::istringstream iss(value);
  std::vector<std::string> tok;
  std::string t;
  while (iss >> t) tok.push_back(t);
  if (tok.size() != 6)
    throw std::invalid_argument("scenario '" + name + "' needs 6 fields, got " +
                                std::to_string(tok.size()));
  ScenarioSpec s;
  s.name = name;
  if (tok[0] == "none") s.mode = FailureLabel::None;
  else if (tok[0] == "fouling") s.mode = FailureLabel::Fouling;
  else if (tok[0] == "leakage") s.mode = FailureLabel::Leakage;
  else if (tok[0] == "both") s.mode = FailureLabel::Both;
  else throw std::invalid_argument("scenario '" + name + "': unknown mode '" + tok[0] + "'");
  s.tau = ini::to_opt_double(name, tok[1]);
  s.beta_f = ini::to_opt_double(name, tok[2]);
  s.beta_l = ini::to_opt_double(name, tok[3]);
  s.lambda = ini::to_opt_double(name, tok[4]);
  s.n_realizations = ini::to_int(name, tok[5]);
  if (s.n_realizations < 1)
    throw std::invalid_argument("scenario '" + name + "': realization count must be positive");
  return s;
}

inline ExperimentConfig config_from_sections(const ini::Sections& sec) {
  ExperimentConfig cfg;
  auto take = [&](const std::string& section)
      -> const std::map<std::string, std::string>* {
    const auto it = sec.find(section);
    return it == sec.end() ? nullptr : &it->second;
  };

  if (const auto* s = take("operating")) {
    for (const auto& [k, v] : *s) {
      if (k == "t_hot_in") cfg.conditions.hot_inlet.inlet_temp = ini::to_double(k, v);
      else if (k == "t_cold_in") cfg.conditions.cold_inlet.inlet_temp = ini::to_double(k, v);
      else if (k == "m_hot") cfg.conditions.hot_inlet.mass_flow = ini::to_double(k, v);
      else if (k == "m_cold") cfg.conditions.cold_inlet.mass_flow = ini::to_double(k, v);
      else if (k == "cp_hot") cfg.conditions.hot_inlet.specific_heat = ini::to_double(k, v);
      else if (k == "cp_cold") cfg.conditions.cold_inlet.specific_heat = ini::to_double(k, v);
      else if (k == "ua_clean") cfg.conditions.ua_clean = ini::to_double(k, v);
      else if (k == "horizon") cfg.conditions.horizon = ini::to_int(k, v);
      else if (k == "noise_temp") cfg.conditions.noise_temp = ini::to_double(k, v);
      else if (k == "noise_flow") cfg.conditions.noise_flow = ini::to_double(k, v);
      else throw std::invalid_argument("unknown [operating] key: " + k);
    }
  }

  cfg.prior = PriorSpec::for_horizon(cfg.conditions.horizon);
  if (const auto* s = take("priors")) {
    for (const auto& [k, v] : *s) {
      if (k == "mode_probs") {
        std::istringstream iss(v);
        for (double& p : cfg.prior.mode_probs)
          if (!(iss >> p)) throw std::invalid_argument("mode_probs needs 4 numbers");
      } else if (k == "beta_f_median") cfg.prior.log_beta_f_loc = std::log(ini::to_double(k, v));
      else if (k == "beta_f_log_sd") cfg.prior.log_beta_f_scale = ini::to_double(k, v);
      else if (k == "beta_l_median") cfg.prior.log_beta_l_loc = std::log(ini::to_double(k, v));
      else if (k == "beta_l_log_sd") cfg.prior.log_beta_l_scale = ini::to_double(k, v);
      else if (k == "lambda_median") cfg.prior.log_lambda_loc = std::log(ini::to_double(k, v));
      else if (k == "lambda_log_sd") cfg.prior.log_lambda_scale = ini::to_double(k, v);
      else if (k == "k_gate") cfg.prior.k_gate = ini::to_double(k, v);
      else if (k == "k_relax") cfg.prior.k_relax = ini::to_double(k, v);
      else throw std::invalid_argument("unknown [priors] key: " + k);
    }
  }

  if (const auto* s = take("mcmc")) {
    for (const auto& [k, v] : *s) {
      if (k == "chains") cfg.mcmc.n_chains = ini::to_int(k, v);
      else if (k == "warmup") cfg.mcmc.n_warmup = ini::to_int(k, v);
      else if (k == "samples") cfg.mcmc.n_samples = ini::to_int(k, v);
      else if (k == "target_accept") cfg.mcmc.target_accept = ini::to_double(k, v);
      else if (k == "init_search_draws") cfg.mcmc.init_search_draws = ini::to_int(k, v);
      else if (k == "latent_block_size") cfg.mcmc.latent_block_size = ini::to_int(k, v);
      else if (k == "parallel") cfg.mcmc.parallel_chains = ini::to_bool(k, v);
      else throw std::invalid_argument("unknown [mcmc] key: " + k);
    }
  }

  if (const auto* s = take("npe")) {
    for (const auto& [k, v] : *s) {
      if (k == "train_sims") cfg.npe.n_train_sims = ini::to_int(k, v);
      else if (k == "posterior_draws") cfg.npe.n_posterior_draws = ini::to_int(k, v);
      else if (k == "learning_rate") cfg.npe.train.learning_rate = ini::to_double(k, v);
      else if (k == "batch_size") cfg.npe.train.batch_size = ini::to_int(k, v);
      else if (k == "max_epochs") cfg.npe.train.max_epochs = ini::to_int(k, v);
      else if (k == "patience") cfg.npe.train.patience = ini::to_int(k, v);
      else if (k == "val_fraction") cfg.npe.train.val_fraction = ini::to_double(k, v);
      else if (k == "hidden") cfg.npe.train.hidden = ini::to_int(k, v);
      else if (k == "layers") cfg.npe.train.n_layers = ini::to_int(k, v);
      else throw std::invalid_argument("unknown [npe] key: " + k);
    }
  }

  if (const auto* s = take("bench")) {
    for (const auto& [k, v] : *s) {
      if (k == "realizations") cfg.bench.n_realizations = ini::to_int(k, v);
      else if (k == "timing_calls") cfg.bench.n_timing_calls = ini::to_int(k, v);
      else throw std::invalid_argument("unknown [bench] key: " + k);
    }
  }

  if (const auto* s = take("scenarios")) {
    if (!s->empty()) {
      cfg.scenarios.clear();
      for (const auto& [name, value] : *s)
        cfg.scenarios.push_back(parse_scenario_line(name, value));
    }
  }

  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  auto sections = ini::parse(in);
  return config_from_sections(sections);
}

inline ExperimentConfig default_config() { return ExperimentConfig{}; }

}  // namespace hxdiag

#endif  // HXDIAG_CONFIG_HPP
