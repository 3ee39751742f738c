// hxdiag: heat-exchanger degradation diagnosis from sensor time series.
// Simulates counterflow exchanger telemetry under fouling and leakage,
// infers failure mode and degradation parameters with an adaptive MCMC
// sampler or an amortized neural posterior, and benchmarks the two.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "hxdiag/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"heat-exchanger failure diagnosis"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "experiment config (INI)");
  app.add_option("--seed", seed, "master seed")->capture_default_str();

  auto load = [&]() {
    return config_path.empty() ? hxdiag::default_config() : hxdiag::load_config(config_path);
  };

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "export synthetic scenario datasets");
  std::string gen_out = "data";
  std::vector<std::string> gen_only;
  gen->add_option("--out", gen_out, "output directory")->capture_default_str();
  gen->add_option("--scenario", gen_only, "restrict to named scenarios");

  // train-npe
  auto* train = app.add_subcommand("train-npe", "train the amortized posterior");
  std::string train_out = "npe";
  train->add_option("--out", train_out, "output directory")->capture_default_str();

  // run-mcmc
  auto* mcmc = app.add_subcommand("run-mcmc", "sample the posterior for one record");
  std::string mcmc_record, mcmc_out = "mcmc";
  mcmc->add_option("--record", mcmc_record, "series CSV")->required();
  mcmc->add_option("--out", mcmc_out, "output directory")->capture_default_str();

  // infer
  auto* infer = app.add_subcommand("infer", "amortized posterior for one record");
  std::string infer_ckpt, infer_record, infer_out = "sbi";
  int infer_draws = 2000;
  infer->add_option("--checkpoint", infer_ckpt, "trained checkpoint JSON")->required();
  infer->add_option("--record", infer_record, "series CSV")->required();
  infer->add_option("--draws", infer_draws, "posterior draws")->capture_default_str();
  infer->add_option("--out", infer_out, "output directory")->capture_default_str();

  // bench
  auto* bench = app.add_subcommand("bench", "paired engine benchmark over scenarios");
  std::string bench_ckpt, bench_out = "bench";
  int bench_realizations = 0;
  bench->add_option("--checkpoint", bench_ckpt, "reuse an existing checkpoint");
  bench->add_option("--realizations", bench_realizations,
                    "override per-scenario realization count");
  bench->add_option("--out", bench_out, "output directory")->capture_default_str();

  // ppc
  auto* ppc = app.add_subcommand("ppc", "posterior predictive degradation bands");
  std::string ppc_samples, ppc_sidecar, ppc_out = "ppc";
  int ppc_draws = 200;
  ppc->add_option("--samples", ppc_samples, "posterior sample CSV")->required();
  ppc->add_option("--sidecar", ppc_sidecar, "record sidecar JSON with true latents");
  ppc->add_option("--draws", ppc_draws, "replicate trajectories")->capture_default_str();
  ppc->add_option("--out", ppc_out, "output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return hxdiag::cli::cmd_gen_data(load(), seed, gen_out, gen_only, std::cout);
    if (train->parsed())
      return hxdiag::cli::cmd_train_npe(load(), seed, train_out, std::cout);
    if (mcmc->parsed())
      return hxdiag::cli::cmd_run_mcmc(load(), mcmc_record, seed, mcmc_out, std::cout);
    if (infer->parsed())
      return hxdiag::cli::cmd_infer(infer_ckpt, infer_record, infer_draws, seed, infer_out,
                                    std::cout);
    if (bench->parsed())
      return hxdiag::cli::cmd_bench(load(), bench_ckpt, seed, bench_out,
                                    bench_realizations, std::cout);
    if (ppc->parsed())
      return hxdiag::cli::cmd_ppc(load(), ppc_samples, ppc_sidecar, ppc_draws, seed,
                                  ppc_out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
