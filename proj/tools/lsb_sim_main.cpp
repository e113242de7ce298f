// lsb-sim: scenario runner, experiment driver, and reference-value oracles.
//
//   lsb-sim run <scenario.cfg> [--out dir]
//   lsb-sim exp <name|all> [--seeds k] [--base-seed s] [--out dir]
//   lsb-sim oracle detect-prob|eq1|mutate-chain [flags]
//
// The default output directory comes from LSB_SIM_OUT when --out is absent.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lsb/experiments.hpp"
#include "lsb/metrics.hpp"

namespace {

std::string out_dir_or_default(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("LSB_SIM_OUT")) return env;
  return ".";
}

bool emit(const std::string& dir, const std::string& name, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::string path = dir + "/" + name;
  if (!lsb::sim::write_file(path, content)) {
    std::fprintf(stderr, "error: cannot write %s\n", path.c_str());
    return false;
  }
  std::printf("wrote %s\n", path.c_str());
  return true;
}

int cmd_run(const std::string& scenario_path, const std::string& out_flag) {
  std::string err;
  auto sc = lsb::sim::Scenario::load_file(scenario_path, &err);
  if (!sc) {
    std::fprintf(stderr, "scenario error: %s\n", err.c_str());
    return 2;
  }
  lsb::sim::Sim sim = lsb::sim::build_sim(*sc);
  sim.run();
  std::string dir = out_dir_or_default(out_flag);
  bool ok = emit(dir, "obm_counters.csv", lsb::sim::obm_counters_csv(sim));
  ok = emit(dir, "packets.csv", sim.engine->packets().csv()) && ok;
  ok = emit(dir, "verify_log.csv", lsb::sim::verify_log_csv(sim)) && ok;
  if (sc->dtm_enabled) ok = emit(dir, "dtm_trace.csv", lsb::sim::dtm_trace_csv(sim)) && ok;
  auto total = sim.engine->packets().total();
  std::printf("t=%.3f packets=%llu bytes=%llu\n", sim.engine->now(),
              (unsigned long long)total.count, (unsigned long long)total.bytes);
  return ok ? 0 : 1;
}

int cmd_exp(const std::string& name, uint64_t seeds, uint64_t base_seed,
            const std::string& out_flag) {
  std::vector<std::string> names;
  if (name == "all") {
    names = lsb::sim::experiment_names();
  } else {
    names.push_back(name);
  }
  std::string dir = out_dir_or_default(out_flag);
  bool all_ok = true;
  for (const auto& n : names) {
    for (uint64_t k = 0; k < seeds; ++k) {
      uint64_t seed = base_seed + k;
      lsb::sim::ExpResult r;
      if (!lsb::sim::run_experiment(n, seed, &r)) {
        std::fprintf(stderr, "unknown experiment: %s\n", n.c_str());
        return 2;
      }
      std::printf("== %s seed=%llu %s\n", n.c_str(), (unsigned long long)seed,
                  r.ok ? "ok" : "FAIL");
      for (const auto& c : r.checks) std::printf("   %s\n", c.c_str());
      std::string fname = n + "_seed" + std::to_string(seed) + ".csv";
      all_ok = emit(dir, fname, r.csv) && r.ok && all_ok;
    }
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LSB two-tier blockchain simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_flag;
  auto* run = app.add_subcommand("run", "simulate one scenario file and dump its metrics");
  run->add_option("scenario", scenario_path, "scenario file (key = value lines)")->required();
  run->add_option("--out", out_flag, "output directory (default $LSB_SIM_OUT or .)");

  std::string exp_name;
  uint64_t seeds = 1;
  uint64_t base_seed = lsb::sim::kAttackSweepSeed;
  std::string exp_out;
  auto* exp = app.add_subcommand("exp", "run a named experiment and write its CSV");
  exp->add_option("name", exp_name, "experiment name or 'all'")->required();
  exp->add_option("--seeds", seeds, "number of consecutive seeds to run");
  exp->add_option("--base-seed", base_seed, "first seed");
  exp->add_option("--out", exp_out, "output directory (default $LSB_SIM_OUT or .)");

  auto* oracle = app.add_subcommand("oracle", "closed-form reference calculators");
  oracle->require_subcommand(1);

  uint64_t o_tmax = 10, o_fakes = 1, o_verifiers = 1;
  int o_ptv = 20;
  auto* dp = oracle->add_subcommand("detect-prob", "exact sampling detection probability");
  dp->add_option("--tmax", o_tmax, "transactions per block");
  dp->add_option("--fakes", o_fakes, "planted transactions");
  dp->add_option("--ptv", o_ptv, "validation percentage");
  dp->add_option("--verifiers", o_verifiers, "independent honest verifiers");

  double e_alpha = 0.625, e_rate = 32;
  uint64_t e_tmax = 10, e_m = 13;
  auto* eq = oracle->add_subcommand("eq1", "consensus-period retune target");
  eq->add_option("--alpha", e_alpha, "midpoint utilization target");
  eq->add_option("--tmax", e_tmax, "transactions per block");
  eq->add_option("--m", e_m, "block manager count");
  eq->add_option("--rate", e_rate, "measured transaction rate");

  size_t m_len = 10;
  uint64_t m_seed = 1;
  auto* mut = oracle->add_subcommand("mutate-chain", "exhaustive single-field tamper sweep");
  mut->add_option("--len", m_len, "chain length");
  mut->add_option("--seed", m_seed, "key generation seed");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return cmd_run(scenario_path, out_flag);
  if (exp->parsed()) return cmd_exp(exp_name, seeds, base_seed, exp_out);
  if (dp->parsed()) {
    std::printf("%g\n", lsb::sim::oracle_detect_prob(o_tmax, o_fakes, o_ptv, o_verifiers));
    return 0;
  }
  if (eq->parsed()) {
    std::printf("%.3f\n", lsb::sim::oracle_eq1_raw(e_alpha, e_tmax, e_m, e_rate));
    std::printf("applied: %.1f\n", lsb::sim::oracle_eq1(e_alpha, e_tmax, e_m, e_rate));
    return 0;
  }
  if (mut->parsed()) {
    auto rep = lsb::sim::oracle_mutate_chain(m_len, m_seed);
    std::printf("mutants: %llu\nkilled: %llu\nsurviving mutants: %llu\nclean chain verifies: %s\n",
                (unsigned long long)rep.mutants, (unsigned long long)rep.killed,
                (unsigned long long)(rep.mutants - rep.killed),
                rep.clean_verifies ? "yes" : "no");
    for (const auto& s : rep.survivors) std::printf("  survivor: %s\n", s.c_str());
    return rep.mutants == rep.killed && rep.clean_verifies ? 0 : 1;
  }
  return 2;
}
