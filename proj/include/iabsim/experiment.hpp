#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "iabsim/scenario.hpp"
#include "iabsim/solver_pi.hpp"

namespace iabsim {

enum class ScenarioKind { kA, kB };

struct ExperimentConfig {
  ScenarioKind kind = ScenarioKind::kA;
  ScenarioAParams scenario_a{2, 4, 100.0};
  ScenarioBParams scenario_b;
  ServiceArea area;
  NetworkLayout layout;
  GridResolution grid;
  PiOptions pi;
  int n_csi = 50;
  int n_trials = 20;
  std::uint64_t master_seed = 1;
  std::vector<double> altitudes{200.0, 500.0};  // used by the sweep
  unsigned threads = 1;                         // trials run concurrently
  std::string output_dir;                       // empty: nothing is written

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every violated invariant of the config; empty when it can be run.
std::vector<std::string> validate_config(const ExperimentConfig& config);

/// Scenario drawn for `trial` (same for the treatment and baseline arms).
Scenario trial_scenario(const ExperimentConfig& config, int trial);

/// One row of the per-instant trace.
struct TraceRow {
  int trial = 0;
  int csi_instant = 0;
  int node_id = 0;                 // UEs 1..U, backhaul link of UAV d is U + d
  std::string node_kind;           // "aUE", "tUE" or "BH"
  std::optional<double> sinr_db;   // empty for a backhaul link that is not in use
  double rate_bps = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct TrialSummary {
  int trial = 0;
  bool feasible = false;                 // P-I solution met every constraint
  double pi_objective_bps = 0.0;         // average sum-rate of the P-I solution
  std::vector<Position3D> uav_positions;
  std::vector<double> avg_ue_sinr_db;    // P-I average SINR per UE
  std::vector<double> avg_bh_sinr_db;    // P-I average SINR per active backhaul link
  double mean_sum_rate_bps = 0.0;        // over CSI instants
  double mean_ue_sinr_db = 0.0;          // over UEs and CSI instants
  double baseline_mean_sum_rate_bps = 0.0;
  double baseline_mean_ue_sinr_db = 0.0;
  double max_gnb_power_w = 0.0;          // largest radiated gNB power seen in the trial
  int pii_infeasible_subbands = 0;

  friend bool operator==(const TrialSummary&, const TrialSummary&) = default;
};

struct NodeSummary {
  int node_id = 0;
  std::string role;                           // "UE" or "BH"
  std::optional<double> mean_sinr_db;
  std::optional<double> baseline_mean_sinr_db;

  friend bool operator==(const NodeSummary&, const NodeSummary&) = default;
};

struct AltitudePoint {
  double altitude_m = 0.0;
  double mean_sum_rate_bps = 0.0;
  double ci95_sum_rate_bps = 0.0;
  double mean_ue_sinr_db = 0.0;
  int feasible_trials = 0;
  std::vector<double> trial_sum_rate_bps;  // per-trial means, trial order

  friend bool operator==(const AltitudePoint&, const AltitudePoint&) = default;
};

struct MetricsSummary {
  int n_trials = 0;
  int n_csi = 0;
  std::uint64_t master_seed = 0;
  std::vector<NodeSummary> nodes;
  double mean_sum_rate_bps = 0.0;
  double ci95_sum_rate_bps = 0.0;          // half-width, normal approximation
  double baseline_mean_sum_rate_bps = 0.0;
  double baseline_ci95_sum_rate_bps = 0.0;
  double mean_ue_sinr_db = 0.0;
  double baseline_mean_ue_sinr_db = 0.0;
  double delta_sinr_db = 0.0;              // with UAVs minus without, same UEs and seeds
  double sum_rate_ratio = 0.0;             // with UAVs over without
  int feasible_trials = 0;
  int infeasible_trials = 0;
  int pii_infeasible_subbands = 0;
  double max_gnb_power_w = 0.0;
  std::vector<TrialSummary> trials;
  std::vector<AltitudePoint> altitude_sweep;

  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

struct ExperimentResult {
  MetricsSummary summary;
  std::vector<TraceRow> trace;
  std::vector<TraceRow> baseline_trace;
};

/// Treatment arm plus the paired no-UAV baseline on the same scenarios and fading.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// The same pipeline with the UAV tier removed; the summary's baseline fields mirror it.
ExperimentResult run_baseline(const ExperimentConfig& config);

/// Solves P-I with the placement grid restricted to each altitude in turn.
std::vector<AltitudePoint> altitude_sweep(const ExperimentConfig& config,
                                          const std::vector<double>& altitudes);

/// Writes trace.csv, baseline_trace.csv, summary.json and the plot-data CSVs into `dir`.
void emit_outputs(const ExperimentResult& result, const std::string& dir);

}  // namespace iabsim
