#ifndef HXDIAG_COMMANDS_HPP
#define HXDIAG_COMMANDS_HPP

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "hxdiag/benchmark.hpp"
#include "hxdiag/config.hpp"
#include "hxdiag/dataset_io.hpp"
#include "hxdiag/mcmc.hpp"
#include "hxdiag/npe.hpp"
#include "hxdiag/npe_io.hpp"

namespace hxdiag::cli {

namespace fs = std::filesystem;

inline std::string realization_stem(int r) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "r%04d", r);
  return buf;
}

inline nlohmann::json scenario_to_json(const ScenarioSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["mode"] = failure_label_name(s.mode);
  j["tau"] = s.tau ? nlohmann::json(*s.tau) : nlohmann::json();
  j["beta_f"] = s.beta_f ? nlohmann::json(*s.beta_f) : nlohmann::json();
  j["beta_l"] = s.beta_l ? nlohmann::json(*s.beta_l) : nlohmann::json();
  j["lambda"] = s.lambda ? nlohmann::json(*s.lambda) : nlohmann::json();
  j["n_realizations"] = s.n_realizations;
  return j;
}

// Synthetic dataset export: per scenario, one series CSV and one ground-truth
// sidecar per realization, plus a manifest tying the files to their seeds.
// Reruns with the same config and seed write identical bytes.
inline int cmd_gen_data(const ExperimentConfig& cfg, std::uint64_t seed,
                        const std::string& out_dir, const std::vector<std::string>& only,
                        std::ostream& log) {
  cfg.validate();
  fs::create_directories(out_dir);
  nlohmann::json manifest;
  manifest["format"] = "hxdiag-dataset-v1";
  manifest["seed"] = seed;
  manifest["conditions"] = conditions_to_json(cfg.conditions);
  manifest["prior"] = detail::prior_to_json(cfg.prior);

  for (const ScenarioSpec& spec : cfg.scenarios) {
    if (!only.empty() &&
        std::find(only.begin(), only.end(), spec.name) == only.end())
      continue;
    manifest["scenarios"].push_back(scenario_to_json(spec));
    const fs::path dir = fs::path(out_dir) / spec.name;
    fs::create_directories(dir);
    const DegradationTheta truth = spec.truth(cfg.prior);
    for (int r = 0; r < spec.n_realizations; ++r) {
      const std::uint64_t rs = record_stream(seed, spec.name, r);
      Rng rng(rs);
      const SimulationRecord rec = simulate(truth, cfg.conditions, rng);
      const std::string stem = realization_stem(r);
      const fs::path series = dir / (stem + ".csv");
      const fs::path sidecar = dir / (stem + ".json");
      write_series_csv(rec.observed, series.string());
      std::ofstream sout(sidecar);
      if (!sout) throw std::runtime_error("cannot write " + sidecar.string());
      sout << record_sidecar_to_json(rec, cfg.conditions, spec.name, rs).dump(1) << '\n';
      manifest["files"].push_back({{"scenario", spec.name},
                                   {"realization", r},
                                   {"record_seed", rs},
                                   {"series", (fs::path(spec.name) / (stem + ".csv")).string()},
                                   {"sidecar", (fs::path(spec.name) / (stem + ".json")).string()}});
    }
    log << spec.name << ": wrote " << spec.n_realizations << " realizations\n";
  }

  std::ofstream mout(fs::path(out_dir) / "manifest.json");
  if (!mout) throw std::runtime_error("cannot write manifest.json");
  mout << manifest.dump(1) << '\n';
  return 0;
}

inline TrainedPosterior train_from_config(const ExperimentConfig& cfg, std::uint64_t seed,
                                          std::ostream& log) {
  log << "simulating " << cfg.npe.n_train_sims << " training draws...\n";
  const TrainingSet ts = generate_training_set(cfg.npe.n_train_sims, cfg.prior,
                                               cfg.conditions, derive_stream(seed, 0x747261ULL));
  TrainConfig tc = cfg.npe.train;
  tc.seed = derive_stream(seed, 0x6F7074ULL);
  log << "training...\n";
  const TrainedPosterior tp = train_npe(ts, tc);
  log << "epochs " << tp.meta.epochs_run << " (best " << tp.meta.best_epoch
      << "), val loss " << tp.meta.best_val_loss << " (nll " << tp.meta.best_val_flow_nll
      << " + ce " << tp.meta.best_val_ce << "), " << tp.meta.train_seconds << " s\n";
  return tp;
}

inline int cmd_train_npe(const ExperimentConfig& cfg, std::uint64_t seed,
                         const std::string& out_dir, std::ostream& log) {
  cfg.validate();
  fs::create_directories(out_dir);
  const TrainedPosterior tp = train_from_config(cfg, seed, log);
  const std::string path = (fs::path(out_dir) / "npe_checkpoint.json").string();
  save_checkpoint(tp, path);
  log << "checkpoint: " << path << "\n";
  return 0;
}

inline int cmd_run_mcmc(const ExperimentConfig& cfg, const std::string& record_path,
                        std::uint64_t seed, const std::string& out_dir, std::ostream& log) {
  cfg.validate();
  fs::create_directories(out_dir);
  const ObservationSeries obs = read_series_csv(record_path);
  ChainConfig mc = cfg.mcmc;
  mc.seed = seed;
  const PosteriorEnsemble ens = run_mcmc(obs, cfg.conditions, cfg.prior, mc);
  write_ensemble_csv(ens, (fs::path(out_dir) / "mcmc_samples.csv").string());
  std::ofstream sout(fs::path(out_dir) / "mcmc_summary.json");
  sout << ensemble_summary_json(ens).dump(1) << '\n';
  log << "mode: " << failure_label_name(ens.point_mode) << ", draws " << ens.thetas.size()
      << ", simulator calls " << ens.simulator_call_count << ", " << ens.wall_time_seconds
      << " s\n";
  for (const auto& [name, d] : ens.diagnostics)
    log << "  " << name << ": r_hat " << d.r_hat << ", ess " << d.ess << "\n";
  return 0;
}

inline int cmd_infer(const std::string& checkpoint_path, const std::string& record_path,
                     int n_draws, std::uint64_t seed, const std::string& out_dir,
                     std::ostream& log) {
  fs::create_directories(out_dir);
  const TrainedPosterior tp = load_checkpoint(checkpoint_path);
  const ObservationSeries obs = read_series_csv(record_path);
  const PosteriorEnsemble ens = npe_infer(tp, obs, n_draws, seed);
  write_ensemble_csv(ens, (fs::path(out_dir) / "sbi_samples.csv").string());
  std::ofstream sout(fs::path(out_dir) / "sbi_summary.json");
  sout << ensemble_summary_json(ens).dump(1) << '\n';
  log << "mode: " << failure_label_name(ens.point_mode) << ", draws " << ens.thetas.size()
      << ", " << ens.wall_time_seconds << " s\n";
  return 0;
}

inline int cmd_bench(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                     std::uint64_t seed, const std::string& out_dir, int realizations,
                     std::ostream& log) {
  ExperimentConfig c = cfg;
  if (realizations > 0) c.bench.n_realizations = realizations;
  c.validate();
  fs::create_directories(out_dir);

  TrainedPosterior tp;
  if (!checkpoint_path.empty()) {
    tp = load_checkpoint(checkpoint_path);
    log << "loaded checkpoint " << checkpoint_path << " (training time unknown: 0 s)\n";
  } else {
    tp = train_from_config(c, derive_stream(seed, 0x747031ULL), log);
    save_checkpoint(tp, (fs::path(out_dir) / "npe_checkpoint.json").string());
  }

  const BenchmarkReport report = run_benchmark(c, tp, derive_stream(seed, 0x62656EULL), &log);
  write_benchmark_csvs(report, out_dir);

  log << "\nengine accuracy by scenario:\n";
  for (const auto& sb : report.scenarios)
    log << "  " << sb.spec.name << ": mcmc " << sb.accuracy(false) << ", sbi "
        << sb.accuracy(true) << "\n";
  log << "mcmc " << report.mcmc_mean_call_seconds << " s/call, sbi "
      << report.sbi_mean_call_seconds << " s/call, speedup " << report.speedup()
      << "x, train " << report.train_seconds << " s, break-even "
      << report.break_even_calls() << " calls\n";
  return 0;
}

// Posterior predictive bands for the latent degradation paths drawn from a
// sample file, optionally annotated with the record's true paths.
inline int cmd_ppc(const ExperimentConfig& cfg, const std::string& samples_path,
                   const std::string& sidecar_path, int n_rep, std::uint64_t seed,
                   const std::string& out_dir, std::ostream& log) {
  cfg.validate();
  if (n_rep < 10) throw std::invalid_argument("ppc needs at least 10 replicates");
  fs::create_directories(out_dir);
  const PosteriorEnsemble ens = read_ensemble_csv(samples_path, cfg.prior);
  const int T = cfg.conditions.horizon;

  std::vector<double> true_r, true_l;
  if (!sidecar_path.empty()) {
    std::ifstream in(sidecar_path);
    if (!in) throw std::runtime_error("cannot open sidecar: " + sidecar_path);
    nlohmann::json j;
    in >> j;
    true_r = j.at("latents").at("fouling_factor").get<std::vector<double>>();
    true_l = j.at("latents").at("leak_fraction").get<std::vector<double>>();
  }

  std::vector<std::vector<double>> r_paths(T), l_paths(T);
  const std::size_t n_ens = ens.thetas.size();
  for (int j = 0; j < n_rep; ++j) {
    const std::size_t pick = (static_cast<std::size_t>(j) * n_ens) / n_rep;
    const DegradationTheta& theta = ens.thetas[pick];
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(j)));
    const LatentTrajectory traj = sample_trajectory(theta.params, theta.mode, T, rng);
    for (int t = 0; t < T; ++t) {
      r_paths[t].push_back(traj.fouling_factor[t]);
      l_paths[t].push_back(traj.leak_fraction[t]);
    }
  }

  const std::array<double, 5> qs{0.05, 0.25, 0.5, 0.75, 0.95};
  std::ofstream out(fs::path(out_dir) / "ppc_bands.csv");
  if (!out) throw std::runtime_error("cannot write ppc_bands.csv");
  out << "t,r_q05,r_q25,r_q50,r_q75,r_q95,l_q05,l_q25,l_q50,l_q75,l_q95";
  if (!true_r.empty()) out << ",r_true,l_true";
  out << '\n';
  for (int t = 0; t < T; ++t) {
    out << (t + 1);
    for (double q : qs) out << ',' << format_double(sample_quantile(r_paths[t], q));
    for (double q : qs) out << ',' << format_double(sample_quantile(l_paths[t], q));
    if (!true_r.empty())
      out << ',' << format_double(true_r[t]) << ',' << format_double(true_l[t]);
    out << '\n';
  }
  log << "wrote ppc bands over " << n_rep << " replicate trajectories\n";
  return 0;
}

}  // namespace hxdiag::cli

#endif  // HXDIAG_COMMANDS_HPP
