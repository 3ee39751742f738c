#ifndef HXDIAG_DATASET_IO_HPP
#define HXDIAG_DATASET_IO_HPP

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "hxdiag/npe_io.hpp"
#include "hxdiag/observation.hpp"
#include "hxdiag/posterior.hpp"

namespace hxdiag {

// Shortest round-trip decimal form; reading the text back yields the exact
// same double, which is what the rerun-identical contract leans on.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("bad numeric field: '" + s + "'");
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream iss(line);
  while (std::getline(iss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline void write_series_csv(const ObservationSeries& obs, const std::string& path) {
  obs.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t,t_hot_in,t_hot_out,t_cold_in,t_cold_out,m_hot_in,m_hot_out\n";
  for (int i = 0; i < obs.size(); ++i) {
    out << (i + 1) << ',' << format_double(obs.t_hot_in[i]) << ','
        << format_double(obs.t_hot_out[i]) << ',' << format_double(obs.t_cold_in[i]) << ','
        << format_double(obs.t_cold_out[i]) << ',' << format_double(obs.m_hot_in[i]) << ','
        << format_double(obs.m_hot_out[i]) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing: " + path);
}

inline ObservationSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open series: " + path);
  std::string line;
  if (!std::getline(in, line) ||
      line != "t,t_hot_in,t_hot_out,t_cold_in,t_cold_out,m_hot_in,m_hot_out")
    throw std::runtime_error("unrecognized series header in " + path);
  ObservationSeries obs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) throw std::runtime_error("bad series row in " + path);
    obs.t_hot_in.push_back(parse_double(f[1]));
    obs.t_hot_out.push_back(parse_double(f[2]));
    obs.t_cold_in.push_back(parse_double(f[3]));
    obs.t_cold_out.push_back(parse_double(f[4]));
    obs.m_hot_in.push_back(parse_double(f[5]));
    obs.m_hot_out.push_back(parse_double(f[6]));
  }
  obs.validate();
  if (obs.size() == 0) throw std::runtime_error("empty series in " + path);
  return obs;
}

inline nlohmann::json conditions_to_json(const OperatingConditions& c) {
  return {{"t_hot_in", c.hot_inlet.inlet_temp},   {"t_cold_in", c.cold_inlet.inlet_temp},
          {"m_hot", c.hot_inlet.mass_flow},       {"m_cold", c.cold_inlet.mass_flow},
          {"cp_hot", c.hot_inlet.specific_heat},  {"cp_cold", c.cold_inlet.specific_heat},
          {"ua_clean", c.ua_clean},               {"horizon", c.horizon},
          {"noise_temp", c.noise_temp},           {"noise_flow", c.noise_flow}};
}

inline OperatingConditions conditions_from_json(const nlohmann::json& j) {
  OperatingConditions c;
  c.hot_inlet.inlet_temp = j.at("t_hot_in").get<double>();
  c.cold_inlet.inlet_temp = j.at("t_cold_in").get<double>();
  c.hot_inlet.mass_flow = j.at("m_hot").get<double>();
  c.cold_inlet.mass_flow = j.at("m_cold").get<double>();
  c.hot_inlet.specific_heat = j.at("cp_hot").get<double>();
  c.cold_inlet.specific_heat = j.at("cp_cold").get<double>();
  c.ua_clean = j.at("ua_clean").get<double>();
  c.horizon = j.at("horizon").get<int>();
  c.noise_temp = j.at("noise_temp").get<double>();
  c.noise_flow = j.at("noise_flow").get<double>();
  c.validate();
  return c;
}

inline nlohmann::json theta_to_json(const DegradationTheta& t) {
  return {{"mode", failure_label_name(t.mode.label)}, {"tau", t.params.tau},
          {"beta_f", t.params.beta_f},                {"beta_l", t.params.beta_l},
          {"lambda", t.params.lambda},                {"k_gate", t.params.k_gate},
          {"k_relax", t.params.k_relax}};
}

inline FailureLabel failure_label_from_name(const std::string& name) {
  if (name == "none") return FailureLabel::None;
  if (name == "fouling") return FailureLabel::Fouling;
  if (name == "leakage") return FailureLabel::Leakage;
  if (name == "both") return FailureLabel::Both;
  throw std::runtime_error("unknown failure mode name: " + name);
}

inline DegradationTheta theta_from_json(const nlohmann::json& j) {
  DegradationTheta t;
  t.mode.label = failure_label_from_name(j.at("mode").get<std::string>());
  t.params.tau = j.at("tau").get<double>();
  t.params.beta_f = j.at("beta_f").get<double>();
  t.params.beta_l = j.at("beta_l").get<double>();
  t.params.lambda = j.at("lambda").get<double>();
  t.params.k_gate = j.at("k_gate").get<double>();
  t.params.k_relax = j.at("k_relax").get<double>();
  return t;
}

// Ground-truth sidecar for a generated record; carries the latent paths so
// posterior predictive checks can plot against the truth.
inline nlohmann::json record_sidecar_to_json(const SimulationRecord& rec,
                                             const OperatingConditions& cond,
                                             const std::string& scenario,
                                             std::uint64_t record_seed) {
  nlohmann::json j;
  j["format"] = "hxdiag-record-v1";
  j["scenario"] = scenario;
  j["record_seed"] = record_seed;
  j["theta"] = theta_to_json(rec.theta);
  j["conditions"] = conditions_to_json(cond);
  j["latents"] = {{"fouling_factor", rec.latents.fouling_factor},
                  {"leak_fraction", rec.latents.leak_fraction}};
  return j;
}

inline void write_ensemble_csv(const PosteriorEnsemble& ens, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "chain,mode,tau,beta_f,beta_l,lambda\n";
  for (std::size_t i = 0; i < ens.thetas.size(); ++i) {
    const DegradationTheta& t = ens.thetas[i];
    const int chain = i < ens.chain_ids.size() ? ens.chain_ids[i] : 0;
    out << chain << ',' << static_cast<int>(t.mode.label) << ','
        << format_double(t.params.tau) << ',' << format_double(t.params.beta_f) << ','
        << format_double(t.params.beta_l) << ',' << format_double(t.params.lambda) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing: " + path);
}

inline PosteriorEnsemble read_ensemble_csv(const std::string& path,
                                           const PriorSpec& prior) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ensemble: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "chain,mode,tau,beta_f,beta_l,lambda")
    throw std::runtime_error("unrecognized ensemble header in " + path);
  PosteriorEnsemble ens;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw std::runtime_error("bad ensemble row in " + path);
    DegradationTheta t;
    const int z = static_cast<int>(parse_double(f[1]));
    t.mode.label = failure_label_from_int(z);
    t.params.tau = parse_double(f[2]);
    t.params.beta_f = parse_double(f[3]);
    t.params.beta_l = parse_double(f[4]);
    t.params.lambda = parse_double(f[5]);
    t.params.k_gate = prior.k_gate;
    t.params.k_relax = prior.k_relax;
    ens.thetas.push_back(t);
    ens.chain_ids.push_back(static_cast<int>(parse_double(f[0])));
    ++ens.mode_counts[z];
  }
  if (ens.thetas.empty()) throw std::runtime_error("empty ensemble in " + path);
  ens.point_mode = ens.plurality_mode();
  return ens;
}

// Deterministic run summary (no wall-clock fields).
inline nlohmann::json ensemble_summary_json(const PosteriorEnsemble& ens) {
  nlohmann::json j;
  j["n_draws"] = ens.thetas.size();
  j["point_mode"] = failure_label_name(ens.point_mode);
  const double total = static_cast<double>(ens.thetas.size());
  for (int z = 0; z < 4; ++z)
    j["mode_probs"][failure_label_name(failure_label_from_int(z))] =
        static_cast<double>(ens.mode_counts[z]) / total;
  j["simulator_calls"] = ens.simulator_call_count;
  for (const auto& [name, d] : ens.diagnostics) {
    j["diagnostics"][name] = {{"r_hat", d.r_hat}, {"ess", d.ess}};
  }
  return j;
}

}  // namespace hxdiag

#endif  // HXDIAG_DATASET_IO_HPP
