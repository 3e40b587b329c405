// iabsim: batch front end for the IAB placement/power experiments.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iabsim/experiment.hpp"
#include "iabsim/serialization.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::vector<double>> altitudes;
  std::optional<double> grid_step;
  std::optional<int> trials;
  std::optional<int> csi;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "experiment config (JSON)");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--grid-step", o.grid_step, "placement grid step in m (all axes)");
  cmd->add_option("--trials", o.trials, "number of trials");
  cmd->add_option("--csi", o.csi, "CSI instants per trial");
  cmd->add_option("--threads", o.threads, "trials run concurrently");
}

iabsim::ExperimentConfig resolve(const Overrides& o) {
  iabsim::ExperimentConfig c;
  if (!o.config_path.empty()) c = iabsim::load_config(o.config_path);
  if (o.seed) c.master_seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.altitudes) c.altitudes = *o.altitudes;
  if (o.grid_step) c.grid = iabsim::GridResolution{*o.grid_step, *o.grid_step, *o.grid_step};
  if (o.trials) c.n_trials = *o.trials;
  if (o.csi) c.n_csi = *o.csi;
  if (o.threads) c.threads = *o.threads;
  return c;
}

void report(const iabsim::MetricsSummary& m) {
  std::cout << "trials: " << m.n_trials << " (" << m.feasible_trials << " feasible), csi: " << m.n_csi
            << "\n"
            << "mean sum-rate: " << m.mean_sum_rate_bps / 1e6 << " Mbit/s (+/- "
            << m.ci95_sum_rate_bps / 1e6 << ")\n"
            << "baseline sum-rate: " << m.baseline_mean_sum_rate_bps / 1e6 << " Mbit/s\n"
            << "mean UE SINR: " << m.mean_ue_sinr_db << " dB, delta vs baseline "
            << m.delta_sinr_db << " dB\n";
  for (const auto& p : m.altitude_sweep) {
    std::cout << "altitude " << p.altitude_m << " m: " << p.mean_sum_rate_bps / 1e6
              << " Mbit/s, UE SINR " << p.mean_ue_sinr_db << " dB\n";
  }
}

int finish(const iabsim::ExperimentResult& r, const iabsim::ExperimentConfig& c) {
  if (!c.output_dir.empty()) iabsim::emit_outputs(r, c.output_dir);
  report(r.summary);
  if (r.summary.feasible_trials == 0) {
    std::cerr << "no trial produced a feasible placement\n";
    return kExitInfeasible;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV-assisted in-band IAB simulator"};
  app.require_subcommand(1);
  Overrides o;

  auto* run = app.add_subcommand("run", "P-I placement plus per-CSI power allocation, with paired baseline");
  add_common(run, o);
  auto* baseline = app.add_subcommand("baseline", "same pipeline without the UAV tier");
  add_common(baseline, o);
  auto* sweep = app.add_subcommand("sweep", "restrict the placement to each altitude in turn");
  add_common(sweep, o);
  sweep->add_option("--altitudes", o.altitudes, "altitudes in m, comma separated")->delimiter(',');
  auto* check = app.add_subcommand("validate", "check a config and print it in canonical form");
  add_common(check, o);

  CLI11_PARSE(app, argc, argv);

  iabsim::ExperimentConfig cfg;
  try {
    cfg = resolve(o);
    const auto problems = iabsim::validate_config(cfg);
    if (!problems.empty()) {
      for (const auto& p : problems) std::cerr << "config: " << p << "\n";
      return kExitConfig;
    }
  } catch (const iabsim::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*check) {
      std::cout << iabsim::config_to_json(cfg).dump(2) << "\n";
      return kExitOk;
    }
    if (*baseline) return finish(iabsim::run_baseline(cfg), cfg);
    if (*sweep) {
      iabsim::ExperimentResult r = iabsim::run_experiment(cfg);
      r.summary.altitude_sweep = iabsim::altitude_sweep(cfg, cfg.altitudes);
      return finish(r, cfg);
    }
    return finish(iabsim::run_experiment(cfg), cfg);
  } catch (const iabsim::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
