#ifndef HXDIAG_BENCHMARK_HPP
#define HXDIAG_BENCHMARK_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "hxdiag/config.hpp"
#include "hxdiag/dataset_io.hpp"
#include "hxdiag/mcmc.hpp"
#include "hxdiag/metrics.hpp"
#include "hxdiag/npe.hpp"

namespace hxdiag {

inline std::uint64_t record_stream(std::uint64_t master, const std::string& scenario,
                                   int realization) {
  return derive_stream(derive_stream(master, hash_name(scenario)),
                       static_cast<std::uint64_t>(realization));
}

struct RealizationScore {
  int realization = 0;
  std::uint64_t record_seed = 0;
  int true_mode = 0;
  int mcmc_mode = 0;
  int sbi_mode = 0;
  double mcmc_seconds = 0.0;
  double sbi_seconds = 0.0;
  std::map<std::string, double> truths;
  std::map<std::string, double> mcmc_median, sbi_median;
  std::map<std::string, double> mcmc_crps, sbi_crps;
  std::map<std::string, bool> mcmc_cover90, sbi_cover90;
  std::map<std::string, double> w1_cross;  // unnormalized engine-vs-engine W1
};

inline RealizationScore score_realization(const ScenarioSpec& spec, const PriorSpec& prior,
                                          const PosteriorEnsemble& mcmc_ens,
                                          const PosteriorEnsemble& sbi_ens) {
  RealizationScore row;
  row.true_mode = static_cast<int>(spec.mode);
  row.mcmc_mode = static_cast<int>(mcmc_ens.point_mode);
  row.sbi_mode = static_cast<int>(sbi_ens.point_mode);
  row.mcmc_seconds = mcmc_ens.wall_time_seconds;
  row.sbi_seconds = sbi_ens.wall_time_seconds;
  for (const std::string& param : spec.scored_parameters()) {
    const double truth = spec.true_value(param, prior);
    const std::vector<double> ms = mcmc_ens.parameter_samples(param);
    const std::vector<double> ss = sbi_ens.parameter_samples(param);
    row.truths[param] = truth;
    row.mcmc_median[param] = sample_quantile(ms, 0.5);
    row.sbi_median[param] = sample_quantile(ss, 0.5);
    row.mcmc_crps[param] = crps_ensemble(ms, truth);
    row.sbi_crps[param] = crps_ensemble(ss, truth);
    row.mcmc_cover90[param] = interval_covers(ms, truth, 0.9);
    row.sbi_cover90[param] = interval_covers(ss, truth, 0.9);
    row.w1_cross[param] = wasserstein_1d(ms, ss);
  }
  return row;
}

struct ScenarioBench {
  ScenarioSpec spec;
  std::vector<RealizationScore> rows;

  double accuracy(bool sbi) const {
    if (rows.empty()) return 0.0;
    int hit = 0;
    for (const auto& r : rows)
      if ((sbi ? r.sbi_mode : r.mcmc_mode) == r.true_mode) ++hit;
    return static_cast<double>(hit) / static_cast<double>(rows.size());
  }
};

struct BenchmarkReport {
  std::vector<ScenarioBench> scenarios;
  double train_seconds = 0.0;
  long train_sims = 0;
  int train_epochs = 0;
  double mcmc_mean_call_seconds = 0.0;
  double sbi_mean_call_seconds = 0.0;

  double speedup() const {
    return sbi_mean_call_seconds > 0.0 ? mcmc_mean_call_seconds / sbi_mean_call_seconds
                                       : 0.0;
  }

  // calls after which amortized total cost drops below per-call MCMC cost
  double break_even_calls() const {
    const double gain = mcmc_mean_call_seconds - sbi_mean_call_seconds;
    return gain > 0.0 ? train_seconds / gain : std::numeric_limits<double>::infinity();
  }
};

// Paired evaluation: every realization is simulated once and the identical
// series is handed to both engines.
inline BenchmarkReport run_benchmark(const ExperimentConfig& cfg, const TrainedPosterior& tp,
                                     std::uint64_t seed, std::ostream* log = nullptr) {
  cfg.validate();
  BenchmarkReport report;
  report.train_seconds = tp.meta.train_seconds;
  report.train_sims = tp.meta.n_sims;
  report.train_epochs = tp.meta.epochs_run;

  double mcmc_total = 0.0, sbi_total = 0.0;
  long calls = 0;
  for (const ScenarioSpec& spec : cfg.scenarios) {
    ScenarioBench sb;
    sb.spec = spec;
    const DegradationTheta truth = spec.truth(cfg.prior);
    const int n = cfg.bench.n_realizations > 0 ? cfg.bench.n_realizations
                                               : spec.n_realizations;
    for (int r = 0; r < n; ++r) {
      const std::uint64_t rs = record_stream(seed, spec.name, r);
      Rng rng(rs);
      const SimulationRecord rec = simulate(truth, cfg.conditions, rng);

      ChainConfig mc = cfg.mcmc;
      mc.seed = derive_stream(rs, 0x6D636D63ULL);
      const PosteriorEnsemble me = run_mcmc(rec.observed, cfg.conditions, cfg.prior, mc);
      const PosteriorEnsemble se =
          npe_infer(tp, rec.observed, cfg.npe.n_posterior_draws,
                    derive_stream(rs, 0x73626921ULL));

      RealizationScore row = score_realization(spec, cfg.prior, me, se);
      row.realization = r;
      row.record_seed = rs;
      mcmc_total += row.mcmc_seconds;
      sbi_total += row.sbi_seconds;
      ++calls;
      sb.rows.push_back(std::move(row));
      if (log && ((r + 1) % 25 == 0 || r + 1 == n))
        *log << "  " << spec.name << ": " << (r + 1) << "/" << n << " realizations\n";
    }
    report.scenarios.push_back(std::move(sb));
    if (log)
      *log << spec.name << "  mcmc acc " << report.scenarios.back().accuracy(false)
           << "  sbi acc " << report.scenarios.back().accuracy(true) << "\n";
  }
  if (calls > 0) {
    report.mcmc_mean_call_seconds = mcmc_total / static_cast<double>(calls);
    report.sbi_mean_call_seconds = sbi_total / static_cast<double>(calls);
  }
  return report;
}

inline void write_benchmark_csvs(const BenchmarkReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream out(out_dir + "/accuracy.csv");
    if (!out) throw std::runtime_error("cannot write accuracy.csv");
    out << "scenario,engine,n,correct,accuracy\n";
    for (const auto& sb : report.scenarios) {
      for (const bool sbi : {false, true}) {
        int hit = 0;
        for (const auto& r : sb.rows)
          if ((sbi ? r.sbi_mode : r.mcmc_mode) == r.true_mode) ++hit;
        out << sb.spec.name << ',' << (sbi ? "sbi" : "mcmc") << ',' << sb.rows.size()
            << ',' << hit << ',' << format_double(sb.accuracy(sbi)) << '\n';
      }
    }
  }

  {
    std::ofstream out(out_dir + "/scores.csv");
    if (!out) throw std::runtime_error("cannot write scores.csv");
    out << "scenario,param,truth,mcmc_mean_crps,sbi_mean_crps,"
           "mcmc_coverage90,sbi_coverage90,median_norm_w1\n";
    for (const auto& sb : report.scenarios) {
      for (const std::string& param : sb.spec.scored_parameters()) {
        double crps_m = 0.0, crps_s = 0.0;
        int cov_m = 0, cov_s = 0;
        std::vector<double> w1n;
        double truth = 0.0;
        for (const auto& r : sb.rows) {
          truth = r.truths.at(param);
          crps_m += r.mcmc_crps.at(param);
          crps_s += r.sbi_crps.at(param);
          cov_m += r.mcmc_cover90.at(param) ? 1 : 0;
          cov_s += r.sbi_cover90.at(param) ? 1 : 0;
          w1n.push_back(r.w1_cross.at(param) / std::abs(truth));
        }
        const double n = static_cast<double>(sb.rows.size());
        out << sb.spec.name << ',' << param << ',' << format_double(truth) << ','
            << format_double(crps_m / n) << ',' << format_double(crps_s / n) << ','
            << format_double(cov_m / n) << ',' << format_double(cov_s / n) << ','
            << format_double(sample_quantile(w1n, 0.5)) << '\n';
      }
    }
  }

  {
    std::ofstream out(out_dir + "/timing.csv");
    if (!out) throw std::runtime_error("cannot write timing.csv");
    out << "metric,value\n";
    out << "mcmc_mean_call_seconds," << format_double(report.mcmc_mean_call_seconds) << '\n';
    out << "sbi_mean_call_seconds," << format_double(report.sbi_mean_call_seconds) << '\n';
    out << "sbi_train_seconds," << format_double(report.train_seconds) << '\n';
    out << "sbi_train_sims," << report.train_sims << '\n';
    out << "sbi_train_epochs," << report.train_epochs << '\n';
    out << "speedup_per_call," << format_double(report.speedup()) << '\n';
    out << "break_even_calls," << format_double(report.break_even_calls()) << '\n';
  }

  {
    std::ofstream out(out_dir + "/realizations.csv");
    if (!out) throw std::runtime_error("cannot write realizations.csv");
    out << "scenario,realization,record_seed,true_mode,mcmc_mode,sbi_mode,"
           "mcmc_seconds,sbi_seconds\n";
    for (const auto& sb : report.scenarios)
      for (const auto& r : sb.rows)
        out << sb.spec.name << ',' << r.realization << ',' << r.record_seed << ','
            << r.true_mode << ',' << r.mcmc_mode << ',' << r.sbi_mode << ','
            << format_double(r.mcmc_seconds) << ',' << format_double(r.sbi_seconds) << '\n';
  }

  {
    std::ofstream out(out_dir + "/param_scores.csv");
    if (!out) throw std::runtime_error("cannot write param_scores.csv");
    out << "scenario,realization,param,truth,mcmc_median,sbi_median,mcmc_crps,sbi_crps,"
           "mcmc_cover90,sbi_cover90,w1_cross\n";
    for (const auto& sb : report.scenarios)
      for (const auto& r : sb.rows)
        for (const auto& [param, truth] : r.truths)
          out << sb.spec.name << ',' << r.realization << ',' << param << ','
              << format_double(truth) << ',' << format_double(r.mcmc_median.at(param))
              << ',' << format_double(r.sbi_median.at(param)) << ','
              << format_double(r.mcmc_crps.at(param)) << ','
              << format_double(r.sbi_crps.at(param)) << ','
              << (r.mcmc_cover90.at(param) ? 1 : 0) << ','
              << (r.sbi_cover90.at(param) ? 1 : 0) << ','
              << format_double(r.w1_cross.at(param)) << '\n';
  }
}

}  // namespace hxdiag

#endif  // HXDIAG_BENCHMARK_HPP
