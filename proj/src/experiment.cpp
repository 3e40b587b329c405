#include "iabsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <sstream>
#include <thread>

#include "iabsim/channel.hpp"
#include "iabsim/linkmetrics.hpp"
#include "iabsim/rng.hpp"
#include "iabsim/serialization.hpp"
#include "iabsim/solver_pii.hpp"

namespace iabsim {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// SINR in dB with a floor so that a silent link stays finite in the outputs.
double sinr_db(double linear) { return linear_to_db(std::max(linear, 1e-30)); }

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double ci95(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
}

struct ArmResult {
  Solution solution;
  double mean_sum_rate = 0.0;
  double mean_ue_sinr_db = 0.0;
  double max_gnb_power = 0.0;
  int pii_infeasible = 0;
  std::vector<double> ue_sinr_db;               // per UE, mean over instants
  std::vector<std::optional<double>> bh_sinr_db;  // per UAV, mean over instants in use
  std::vector<TraceRow> rows;
};

ArmResult run_arm(const ExperimentConfig& cfg, const Scenario& s, int trial,
                  std::optional<double> altitude) {
  PlacementGrid grid = enumerate_grid(s.bounds, cfg.grid);
  if (altitude) grid.zs = {*altitude};

  ArmResult arm;
  arm.solution = solve_pi(s, grid, cfg.pi);
  const ServingPlan plan = make_plan(arm.solution.association, arm.solution.powers);
  const Association& a = plan.association;
  const int n_u = s.num_users();
  const int n_d = s.num_uavs();
  std::vector<char> active(idx(n_d));
  for (int d = 1; d <= n_d; ++d) active[idx(d - 1)] = a.uav_active(d) ? 1 : 0;

  std::vector<double> ue_sum(idx(n_u), 0.0);
  std::vector<double> bh_sum(idx(n_d), 0.0);
  std::vector<int> bh_count(idx(n_d), 0);
  double rate_sum = 0.0;
  arm.rows.reserve(idx(cfg.n_csi * (n_u + n_d)));

  for (int c = 0; c < cfg.n_csi; ++c) {
    const std::uint64_t seed =
        derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(trial), tag(StreamTag::kFading),
                                      static_cast<std::uint64_t>(c)});
    const ChannelState ch = realize_channels(s, arm.solution.uav_positions, seed, active);
    const GnbTransmission tx = build_gnb_transmission(ch, plan, s.radio.gnb_max_power);
    const PiiOutcome out = apply_pii(ch, plan, tx, s.radio);
    arm.max_gnb_power =
        std::max({arm.max_gnb_power, tx.transmit_power(), out.tx.transmit_power()});
    arm.pii_infeasible += out.infeasible_subbands;
    rate_sum += out.report.sum_rate;

    for (int u = 0; u < n_u; ++u) {
      const double db = sinr_db(out.report.sinr[idx(u)]);
      ue_sum[idx(u)] += db;
      arm.rows.push_back(TraceRow{trial, c, u + 1, a.served_by_uav(u) ? "aUE" : "tUE", db,
                                  out.report.rate[idx(u)]});
    }
    for (int d = 1; d <= n_d; ++d) {
      TraceRow row{trial, c, n_u + d, "BH", std::nullopt, 0.0};
      if (a.uav_active(d)) {
        const double g = out.report.sinr_bh[idx(d - 1)];
        row.sinr_db = sinr_db(g);
        row.rate_bps = s.radio.bandwidth * std::log2(1.0 + g);
        bh_sum[idx(d - 1)] += *row.sinr_db;
        ++bh_count[idx(d - 1)];
      }
      arm.rows.push_back(std::move(row));
    }
  }

  const double n_csi = static_cast<double>(cfg.n_csi);
  arm.mean_sum_rate = rate_sum / n_csi;
  arm.ue_sinr_db.resize(idx(n_u));
  for (int u = 0; u < n_u; ++u) arm.ue_sinr_db[idx(u)] = ue_sum[idx(u)] / n_csi;
  arm.mean_ue_sinr_db = mean(arm.ue_sinr_db);
  arm.bh_sinr_db.resize(idx(n_d));
  for (int d = 0; d < n_d; ++d) {
    if (bh_count[idx(d)] > 0) arm.bh_sinr_db[idx(d)] = bh_sum[idx(d)] / bh_count[idx(d)];
  }
  return arm;
}

struct TrialOutput {
  ArmResult treatment;
  ArmResult baseline;
};

// Runs fn(trial) for every trial on `threads` workers; results come back in trial order.
template <typename T>
std::vector<T> for_each_trial(int n_trials, unsigned threads, const std::function<T(int)>& fn) {
  std::vector<std::optional<T>> slots(idx(n_trials));
  std::vector<std::exception_ptr> errors(idx(n_trials));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < n_trials; t = next++) {
      try {
        slots[idx(t)] = fn(t);
      } catch (...) {
        errors[idx(t)] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_trials)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::vector<T> out;
  out.reserve(slots.size());
  for (int t = 0; t < n_trials; ++t) {
    if (errors[idx(t)]) std::rethrow_exception(errors[idx(t)]);
    out.push_back(std::move(*slots[idx(t)]));
  }
  return out;
}

void check(const ExperimentConfig& cfg) {
  const auto problems = validate_config(cfg);
  if (problems.empty()) return;
  std::string msg = "invalid config:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ConfigError(msg);
}

ExperimentResult assemble(const ExperimentConfig& cfg, std::vector<TrialOutput> trials) {
  ExperimentResult res;
  MetricsSummary& m = res.summary;
  m.n_trials = cfg.n_trials;
  m.n_csi = cfg.n_csi;
  m.master_seed = cfg.master_seed;

  std::vector<double> rates;
  std::vector<double> base_rates;
  std::vector<double> sinrs;
  std::vector<double> base_sinrs;
  std::vector<double> deltas;
  for (int t = 0; t < cfg.n_trials; ++t) {
    const ArmResult& tr = trials[idx(t)].treatment;
    const ArmResult& bl = trials[idx(t)].baseline;
    TrialSummary ts;
    ts.trial = t;
    ts.feasible = tr.solution.feasible;
    ts.pi_objective_bps = tr.solution.avg_sum_rate;
    ts.uav_positions = tr.solution.uav_positions;
    for (double g : tr.solution.average.sinr) ts.avg_ue_sinr_db.push_back(sinr_db(g));
    for (int d : tr.solution.association.active_uavs()) {
      ts.avg_bh_sinr_db.push_back(sinr_db(tr.solution.average.sinr_bh[idx(d - 1)]));
    }
    ts.mean_sum_rate_bps = tr.mean_sum_rate;
    ts.mean_ue_sinr_db = tr.mean_ue_sinr_db;
    ts.baseline_mean_sum_rate_bps = bl.mean_sum_rate;
    ts.baseline_mean_ue_sinr_db = bl.mean_ue_sinr_db;
    ts.max_gnb_power_w = std::max(tr.max_gnb_power, bl.max_gnb_power);
    ts.pii_infeasible_subbands = tr.pii_infeasible;

    rates.push_back(tr.mean_sum_rate);
    base_rates.push_back(bl.mean_sum_rate);
    sinrs.push_back(tr.mean_ue_sinr_db);
    base_sinrs.push_back(bl.mean_ue_sinr_db);
    deltas.push_back(tr.mean_ue_sinr_db - bl.mean_ue_sinr_db);
    (ts.feasible ? m.feasible_trials : m.infeasible_trials) += 1;
    m.pii_infeasible_subbands += tr.pii_infeasible;
    m.max_gnb_power_w = std::max(m.max_gnb_power_w, ts.max_gnb_power_w);
    m.trials.push_back(std::move(ts));
  }
  m.mean_sum_rate_bps = mean(rates);
  m.ci95_sum_rate_bps = ci95(rates);
  m.baseline_mean_sum_rate_bps = mean(base_rates);
  m.baseline_ci95_sum_rate_bps = ci95(base_rates);
  m.mean_ue_sinr_db = mean(sinrs);
  m.baseline_mean_ue_sinr_db = mean(base_sinrs);
  m.delta_sinr_db = mean(deltas);
  m.sum_rate_ratio =
      m.baseline_mean_sum_rate_bps > 0.0 ? m.mean_sum_rate_bps / m.baseline_mean_sum_rate_bps : 0.0;

  // Per-node bars: UEs keep their ids across trials, backhaul links are U + d.
  const std::size_t n_u = trials.front().treatment.ue_sinr_db.size();
  const std::size_t n_d = trials.front().treatment.bh_sinr_db.size();
  for (std::size_t u = 0; u < n_u; ++u) {
    std::vector<double> with;
    std::vector<double> without;
    for (const auto& t : trials) {
      with.push_back(t.treatment.ue_sinr_db[u]);
      without.push_back(t.baseline.ue_sinr_db[u]);
    }
    m.nodes.push_back(NodeSummary{static_cast<int>(u) + 1, "UE", mean(with), mean(without)});
  }
  for (std::size_t d = 0; d < n_d; ++d) {
    std::vector<double> with;
    for (const auto& t : trials) {
      if (t.treatment.bh_sinr_db[d]) with.push_back(*t.treatment.bh_sinr_db[d]);
    }
    NodeSummary node{static_cast<int>(n_u + d) + 1, "BH", std::nullopt, std::nullopt};
    if (!with.empty()) node.mean_sinr_db = mean(with);
    m.nodes.push_back(node);
  }

  for (auto& t : trials) {
    res.trace.insert(res.trace.end(), std::make_move_iterator(t.treatment.rows.begin()),
                     std::make_move_iterator(t.treatment.rows.end()));
    res.baseline_trace.insert(res.baseline_trace.end(),
                              std::make_move_iterator(t.baseline.rows.begin()),
                              std::make_move_iterator(t.baseline.rows.end()));
  }
  return res;
}

}  // namespace

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  std::vector<std::string> out;
  if (c.n_trials < 1) out.push_back("n_trials must be at least 1");
  if (c.n_csi < 1) out.push_back("n_csi must be at least 1");
  if (c.threads < 1) out.push_back("threads must be at least 1");
  if (!(c.grid.dx > 0.0 && c.grid.dy > 0.0 && c.grid.dz > 0.0)) {
    out.push_back("grid steps must be positive");
  }
  if (c.pi.power_levels < 1) out.push_back("power_levels must be at least 1");
  if (c.pi.threads < 1) out.push_back("solver threads must be at least 1");
  if (c.layout.n_uavs < 0) out.push_back("n_uavs must be non-negative");
  if (!(c.area.width > 0.0 && c.area.depth > 0.0)) out.push_back("service area must be positive");
  if (!out.empty()) return out;

  Scenario s;
  try {
    s = trial_scenario(c, 0);
  } catch (const std::exception& e) {
    out.push_back(std::string("scenario generation: ") + e.what());
    return out;
  }
  for (auto& v : validate(s)) out.push_back(std::move(v));
  if (!out.empty()) return out;
  for (double z : c.altitudes) {
    if (!s.bounds.z.contains(z)) {
      out.push_back("altitude " + format_double(z) + " m lies outside the UAV altitude bounds");
    }
  }
  try {
    const long double n = candidate_count(s, enumerate_grid(s.bounds, c.grid), c.pi);
    if (n > static_cast<long double>(c.pi.candidate_budget)) {
      std::ostringstream os;
      os << "exhaustive search needs " << static_cast<double>(n)
         << " candidates per trial, above candidate_budget " << c.pi.candidate_budget;
      out.push_back(os.str());
    }
  } catch (const std::exception& e) {
    out.push_back(std::string("placement grid: ") + e.what());
  }
  return out;
}

Scenario trial_scenario(const ExperimentConfig& c, int trial) {
  const std::uint64_t seed =
      derive_seed(c.master_seed, {static_cast<std::uint64_t>(trial), tag(StreamTag::kScenario)});
  return c.kind == ScenarioKind::kA ? generate_scenario_a(c.scenario_a, c.area, seed, c.layout)
                                    : generate_scenario_b(c.scenario_b, c.area, seed, c.layout);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  check(cfg);
  auto trials = for_each_trial<TrialOutput>(cfg.n_trials, cfg.threads, [&](int t) {
    const Scenario s = trial_scenario(cfg, t);
    TrialOutput out;
    out.treatment = run_arm(cfg, s, t, std::nullopt);
    out.baseline = s.num_uavs() == 0 ? out.treatment : run_arm(cfg, without_uavs(s), t, std::nullopt);
    return out;
  });
  return assemble(cfg, std::move(trials));
}

ExperimentResult run_baseline(const ExperimentConfig& cfg) {
  check(cfg);
  auto trials = for_each_trial<TrialOutput>(cfg.n_trials, cfg.threads, [&](int t) {
    TrialOutput out;
    out.treatment = run_arm(cfg, without_uavs(trial_scenario(cfg, t)), t, std::nullopt);
    out.baseline = out.treatment;
    return out;
  });
  return assemble(cfg, std::move(trials));
}

std::vector<AltitudePoint> altitude_sweep(const ExperimentConfig& cfg,
                                          const std::vector<double>& altitudes) {
  ExperimentConfig checked = cfg;
  checked.altitudes = altitudes;
  check(checked);
  std::vector<AltitudePoint> points;
  for (double z : altitudes) {
    auto arms = for_each_trial<ArmResult>(cfg.n_trials, cfg.threads, [&](int t) {
      ArmResult arm = run_arm(cfg, trial_scenario(cfg, t), t, z);
      arm.rows.clear();
      return arm;
    });
    AltitudePoint p;
    p.altitude_m = z;
    std::vector<double> sinrs;
    for (const auto& a : arms) {
      p.trial_sum_rate_bps.push_back(a.mean_sum_rate);
      sinrs.push_back(a.mean_ue_sinr_db);
      if (a.solution.feasible) ++p.feasible_trials;
    }
    p.mean_sum_rate_bps = mean(p.trial_sum_rate_bps);
    p.ci95_sum_rate_bps = ci95(p.trial_sum_rate_bps);
    p.mean_ue_sinr_db = mean(sinrs);
    points.push_back(std::move(p));
  }
  return points;
}

void emit_outputs(const ExperimentResult& r, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  const fs::path root(dir);

  std::ostringstream trace;
  write_trace_csv(trace, r.trace);
  write_file((root / "trace.csv").string(), trace.str());

  std::ostringstream base;
  write_trace_csv(base, r.baseline_trace);
  write_file((root / "baseline_trace.csv").string(), base.str());

  write_file((root / "summary.json").string(), Json(r.summary).dump(2) + "\n");

  std::ostringstream nodes;
  nodes << "node_id,role,mean_sinr_db,baseline_mean_sinr_db\r\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& n : r.summary.nodes) {
    nodes << n.node_id << ',' << csv_field(n.role) << ',' << opt(n.mean_sinr_db) << ','
          << opt(n.baseline_mean_sinr_db) << "\r\n";
  }
  write_file((root / "plot_sinr_per_node.csv").string(), nodes.str());

  std::ostringstream alt;
  alt << "altitude_m,mean_sum_rate_bps,ci95_sum_rate_bps,mean_ue_sinr_db,feasible_trials\r\n";
  for (const auto& p : r.summary.altitude_sweep) {
    alt << format_double(p.altitude_m) << ',' << format_double(p.mean_sum_rate_bps) << ','
        << format_double(p.ci95_sum_rate_bps) << ',' << format_double(p.mean_ue_sinr_db) << ','
        << p.feasible_trials << "\r\n";
  }
  write_file((root / "plot_sum_rate_vs_altitude.csv").string(), alt.str());
}

}  // namespace iabsim
