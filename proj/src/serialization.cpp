#include "iabsim/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace iabsim {

namespace {

// Reads the keys of one JSON object and rejects the ones nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(j_.at(key), key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    out = v.get<double>();
  }

  void count(const std::string& key, int& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
    out = v.get<int>();
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  // Either `linear_key` as is or `log_key` converted by `from_log`; not both.
  template <typename F>
  void either(const std::string& linear_key, const std::string& log_key, double& out, F from_log) {
    const bool lin = has(linear_key);
    const bool log = has(log_key);
    if (lin && log) {
      throw ConfigError(where_ + ": give either " + linear_key + " or " + log_key + ", not both");
    }
    if (lin) number(linear_key, out);
    if (log) {
      double v = 0.0;
      number(log_key, v);
      out = from_log(v);
    }
  }

  const Json* child(const std::string& key) {
    if (!has(key)) return nullptr;
    return &j_.at(key);
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path(it.key()) + ": unknown key");
    }
  }

 private:
  template <typename T>
  T convert(const Json& v, const std::string& key) const {
    try {
      return v.get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(path(key) + ": " + e.what());
    }
  }

  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Interval interval_from(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError(where + ": expected [min, max]");
  }
  return Interval{v[0].get<double>(), v[1].get<double>()};
}

Json interval_json(const Interval& i) { return Json::array({i.min, i.max}); }

Position3D position_from(const Json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(where + ": expected [x, y, z]");
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(where + ": expected [x, y, z]");
  }
  return Position3D{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

Json radio_json(const RadioConfig& r) {
  return Json{{"carrier_freq_hz", r.carrier_freq},
              {"bandwidth_hz", r.bandwidth},
              {"noise_power_w", r.noise_power},
              {"gnb_max_power_w", r.gnb_max_power},
              {"uav_max_power_w", r.uav_max_power},
              {"sinr_threshold_ue", r.sinr_threshold_ue},
              {"sinr_threshold_bh", r.sinr_threshold_bh}};
}

RadioConfig radio_from(const Json& j, const std::string& where) {
  RadioConfig r;
  ObjectReader in(j, where);
  in.number("carrier_freq_hz", r.carrier_freq);
  in.number("bandwidth_hz", r.bandwidth);
  in.either("noise_power_w", "noise_power_dbm", r.noise_power, dbm_to_watts);
  in.either("gnb_max_power_w", "gnb_max_power_dbm", r.gnb_max_power, dbm_to_watts);
  in.either("uav_max_power_w", "uav_max_power_dbm", r.uav_max_power, dbm_to_watts);
  in.either("sinr_threshold_ue", "sinr_threshold_ue_db", r.sinr_threshold_ue, db_to_linear);
  in.either("sinr_threshold_bh", "sinr_threshold_bh_db", r.sinr_threshold_bh, db_to_linear);
  in.finish();
  return r;
}

Json propagation_json(const PropagationParams& p) {
  return Json{{"los_a", p.los_a},
              {"los_b", p.los_b},
              {"eta_los_db", p.eta_los_db},
              {"eta_nlos_db", p.eta_nlos_db},
              {"k_factor_db", p.k_factor_db}};
}

PropagationParams propagation_from(const Json& j, const std::string& where) {
  PropagationParams p;
  ObjectReader in(j, where);
  in.number("los_a", p.los_a);
  in.number("los_b", p.los_b);
  in.number("eta_los_db", p.eta_los_db);
  in.number("eta_nlos_db", p.eta_nlos_db);
  in.number("k_factor_db", p.k_factor_db);
  in.finish();
  return p;
}

Json bounds_json(const AltitudeBounds& b) {
  return Json{{"x", interval_json(b.x)}, {"y", interval_json(b.y)}, {"z", interval_json(b.z)}};
}

AltitudeBounds bounds_from(const Json& j, const std::string& where) {
  AltitudeBounds b;
  ObjectReader in(j, where);
  if (const Json* v = in.child("x")) b.x = interval_from(*v, in.path("x"));
  if (const Json* v = in.child("y")) b.y = interval_from(*v, in.path("y"));
  if (const Json* v = in.child("z")) b.z = interval_from(*v, in.path("z"));
  in.finish();
  return b;
}

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<double> optional_from(const Json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

}  // namespace

void to_json(Json& j, const Position3D& p) { j = Json::array({p.x, p.y, p.z}); }

void from_json(const Json& j, Position3D& p) {
  p = Position3D{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

void to_json(Json& j, const Scenario& s) {
  Json uavs = Json::array();
  for (const auto& u : s.uavs) {
    uavs.push_back(Json{{"index", u.index}, {"position", u.position}, {"n_tx_antennas", u.n_tx_antennas}});
  }
  Json users = Json::array();
  for (const auto& u : s.users) users.push_back(Json{{"index", u.index}, {"position", u.position}});
  j = Json{{"radio", radio_json(s.radio)},
           {"propagation", propagation_json(s.propagation)},
           {"gnb", Json{{"position", s.gnb.position}, {"n_tx_antennas", s.gnb.n_tx_antennas}}},
           {"uavs", uavs},
           {"users", users},
           {"bounds", bounds_json(s.bounds)},
           {"area", Json{{"width_m", s.area.width}, {"depth_m", s.area.depth}}}};
}

void from_json(const Json& j, Scenario& s) {
  s = Scenario{};
  s.radio = radio_from(j.at("radio"), "radio");
  s.propagation = propagation_from(j.at("propagation"), "propagation");
  s.gnb.position = j.at("gnb").at("position").get<Position3D>();
  s.gnb.n_tx_antennas = j.at("gnb").at("n_tx_antennas").get<int>();
  for (const auto& u : j.at("uavs")) {
    s.uavs.push_back(UavNode{u.at("index").get<int>(), u.at("position").get<Position3D>(),
                             u.at("n_tx_antennas").get<int>()});
  }
  for (const auto& u : j.at("users")) {
    s.users.push_back(UserNode{u.at("index").get<int>(), u.at("position").get<Position3D>()});
  }
  s.bounds = bounds_from(j.at("bounds"), "bounds");
  s.area.width = j.at("area").at("width_m").get<double>();
  s.area.depth = j.at("area").at("depth_m").get<double>();
}

namespace {

Json link_report_json(const LinkReport& r) {
  return Json{{"sinr", r.sinr}, {"sinr_bh", r.sinr_bh}, {"rate_bps", r.rate}, {"sum_rate_bps", r.sum_rate}};
}

LinkReport link_report_from(const Json& j) {
  LinkReport r;
  r.sinr = j.at("sinr").get<std::vector<double>>();
  r.sinr_bh = j.at("sinr_bh").get<std::vector<double>>();
  r.rate = j.at("rate_bps").get<std::vector<double>>();
  r.sum_rate = j.at("sum_rate_bps").get<double>();
  return r;
}

}  // namespace

void to_json(Json& j, const Solution& s) {
  std::vector<int> idle(s.uav_idle.begin(), s.uav_idle.end());
  j = Json{{"uav_positions", s.uav_positions},
           {"uav_idle", idle},
           {"n_uavs", s.association.n_uavs()},
           {"serving", s.association.serving()},
           {"ue_power_w", s.powers.ue_power},
           {"bh_power_w", s.powers.bh_power},
           {"power_levels", s.power_levels},
           {"average", link_report_json(s.average)},
           {"avg_sum_rate_bps", s.avg_sum_rate},
           {"feasible", s.feasible},
           {"violations", s.violations},
           {"candidates_evaluated", s.candidates_evaluated}};
}

void from_json(const Json& j, Solution& s) {
  s = Solution{};
  s.uav_positions = j.at("uav_positions").get<std::vector<Position3D>>();
  for (int v : j.at("uav_idle").get<std::vector<int>>()) s.uav_idle.push_back(static_cast<char>(v));
  s.association = Association(j.at("serving").get<std::vector<int>>(), j.at("n_uavs").get<int>());
  s.powers.ue_power = j.at("ue_power_w").get<std::vector<double>>();
  s.powers.bh_power = j.at("bh_power_w").get<std::vector<double>>();
  s.power_levels = j.at("power_levels").get<std::vector<int>>();
  s.average = link_report_from(j.at("average"));
  s.avg_sum_rate = j.at("avg_sum_rate_bps").get<double>();
  s.feasible = j.at("feasible").get<bool>();
  s.violations = j.at("violations").get<std::vector<std::string>>();
  s.candidates_evaluated = j.at("candidates_evaluated").get<std::size_t>();
}

void to_json(Json& j, const MetricsSummary& m) {
  Json nodes = Json::array();
  for (const auto& n : m.nodes) {
    nodes.push_back(Json{{"node_id", n.node_id},
                         {"role", n.role},
                         {"mean_sinr_db", optional_json(n.mean_sinr_db)},
                         {"baseline_mean_sinr_db", optional_json(n.baseline_mean_sinr_db)}});
  }
  Json trials = Json::array();
  for (const auto& t : m.trials) {
    trials.push_back(Json{{"trial", t.trial},
                          {"feasible", t.feasible},
                          {"pi_objective_bps", t.pi_objective_bps},
                          {"uav_positions", t.uav_positions},
                          {"avg_ue_sinr_db", t.avg_ue_sinr_db},
                          {"avg_bh_sinr_db", t.avg_bh_sinr_db},
                          {"mean_sum_rate_bps", t.mean_sum_rate_bps},
                          {"mean_ue_sinr_db", t.mean_ue_sinr_db},
                          {"baseline_mean_sum_rate_bps", t.baseline_mean_sum_rate_bps},
                          {"baseline_mean_ue_sinr_db", t.baseline_mean_ue_sinr_db},
                          {"max_gnb_power_w", t.max_gnb_power_w},
                          {"pii_infeasible_subbands", t.pii_infeasible_subbands}});
  }
  Json sweep = Json::array();
  for (const auto& p : m.altitude_sweep) {
    sweep.push_back(Json{{"altitude_m", p.altitude_m},
                         {"mean_sum_rate_bps", p.mean_sum_rate_bps},
                         {"ci95_sum_rate_bps", p.ci95_sum_rate_bps},
                         {"mean_ue_sinr_db", p.mean_ue_sinr_db},
                         {"feasible_trials", p.feasible_trials},
                         {"trial_sum_rate_bps", p.trial_sum_rate_bps}});
  }
  j = Json{{"n_trials", m.n_trials},
           {"n_csi", m.n_csi},
           {"master_seed", m.master_seed},
           {"nodes", nodes},
           {"mean_sum_rate_bps", m.mean_sum_rate_bps},
           {"mean_sum_rate_mbps", m.mean_sum_rate_bps / 1e6},
           {"ci95_sum_rate_bps", m.ci95_sum_rate_bps},
           {"baseline_mean_sum_rate_bps", m.baseline_mean_sum_rate_bps},
           {"baseline_mean_sum_rate_mbps", m.baseline_mean_sum_rate_bps / 1e6},
           {"baseline_ci95_sum_rate_bps", m.baseline_ci95_sum_rate_bps},
           {"mean_ue_sinr_db", m.mean_ue_sinr_db},
           {"baseline_mean_ue_sinr_db", m.baseline_mean_ue_sinr_db},
           {"delta_sinr_db", m.delta_sinr_db},
           {"sum_rate_ratio", m.sum_rate_ratio},
           {"feasible_trials", m.feasible_trials},
           {"infeasible_trials", m.infeasible_trials},
           {"pii_infeasible_subbands", m.pii_infeasible_subbands},
           {"max_gnb_power_w", m.max_gnb_power_w},
           {"max_gnb_power_dbm", watts_to_dbm(std::max(m.max_gnb_power_w, 1e-300))},
           {"trials", trials},
           {"altitude_sweep", sweep}};
}

void from_json(const Json& j, MetricsSummary& m) {
  m = MetricsSummary{};
  m.n_trials = j.at("n_trials").get<int>();
  m.n_csi = j.at("n_csi").get<int>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const auto& n : j.at("nodes")) {
    m.nodes.push_back(NodeSummary{n.at("node_id").get<int>(), n.at("role").get<std::string>(),
                                  optional_from(n.at("mean_sinr_db")),
                                  optional_from(n.at("baseline_mean_sinr_db"))});
  }
  m.mean_sum_rate_bps = j.at("mean_sum_rate_bps").get<double>();
  m.ci95_sum_rate_bps = j.at("ci95_sum_rate_bps").get<double>();
  m.baseline_mean_sum_rate_bps = j.at("baseline_mean_sum_rate_bps").get<double>();
  m.baseline_ci95_sum_rate_bps = j.at("baseline_ci95_sum_rate_bps").get<double>();
  m.mean_ue_sinr_db = j.at("mean_ue_sinr_db").get<double>();
  m.baseline_mean_ue_sinr_db = j.at("baseline_mean_ue_sinr_db").get<double>();
  m.delta_sinr_db = j.at("delta_sinr_db").get<double>();
  m.sum_rate_ratio = j.at("sum_rate_ratio").get<double>();
  m.feasible_trials = j.at("feasible_trials").get<int>();
  m.infeasible_trials = j.at("infeasible_trials").get<int>();
  m.pii_infeasible_subbands = j.at("pii_infeasible_subbands").get<int>();
  m.max_gnb_power_w = j.at("max_gnb_power_w").get<double>();
  for (const auto& t : j.at("trials")) {
    TrialSummary ts;
    ts.trial = t.at("trial").get<int>();
    ts.feasible = t.at("feasible").get<bool>();
    ts.pi_objective_bps = t.at("pi_objective_bps").get<double>();
    ts.uav_positions = t.at("uav_positions").get<std::vector<Position3D>>();
    ts.avg_ue_sinr_db = t.at("avg_ue_sinr_db").get<std::vector<double>>();
    ts.avg_bh_sinr_db = t.at("avg_bh_sinr_db").get<std::vector<double>>();
    ts.mean_sum_rate_bps = t.at("mean_sum_rate_bps").get<double>();
    ts.mean_ue_sinr_db = t.at("mean_ue_sinr_db").get<double>();
    ts.baseline_mean_sum_rate_bps = t.at("baseline_mean_sum_rate_bps").get<double>();
    ts.baseline_mean_ue_sinr_db = t.at("baseline_mean_ue_sinr_db").get<double>();
    ts.max_gnb_power_w = t.at("max_gnb_power_w").get<double>();
    ts.pii_infeasible_subbands = t.at("pii_infeasible_subbands").get<int>();
    m.trials.push_back(std::move(ts));
  }
  for (const auto& p : j.at("altitude_sweep")) {
    AltitudePoint a;
    a.altitude_m = p.at("altitude_m").get<double>();
    a.mean_sum_rate_bps = p.at("mean_sum_rate_bps").get<double>();
    a.ci95_sum_rate_bps = p.at("ci95_sum_rate_bps").get<double>();
    a.mean_ue_sinr_db = p.at("mean_ue_sinr_db").get<double>();
    a.feasible_trials = p.at("feasible_trials").get<int>();
    a.trial_sum_rate_bps = p.at("trial_sum_rate_bps").get<std::vector<double>>();
    m.altitude_sweep.push_back(std::move(a));
  }
}

ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig c;
  ObjectReader top(j, "config");

  if (const Json* v = top.child("scenario")) {
    ObjectReader in(*v, "scenario");
    std::string kind = "A";
    in.get("kind", kind);
    if (kind == "A" || kind == "a") {
      c.kind = ScenarioKind::kA;
    } else if (kind == "B" || kind == "b") {
      c.kind = ScenarioKind::kB;
    } else {
      throw ConfigError("scenario.kind: expected \"A\" or \"B\", got \"" + kind + "\"");
    }
    in.count("n_hotspots", c.scenario_a.n_hotspots);
    in.count("ues_per_hotspot", c.scenario_a.ues_per_hotspot);
    in.number("hotspot_radius_m", c.scenario_a.hotspot_radius);
    in.count("hotspot_ues", c.scenario_b.hotspot_ues);
    in.count("background_ues", c.scenario_b.background_ues);
    in.number("hotspot_sigma_m", c.scenario_b.hotspot_sigma);
    in.finish();
  }
  if (const Json* v = top.child("area")) {
    ObjectReader in(*v, "area");
    in.number("width_m", c.area.width);
    in.number("depth_m", c.area.depth);
    in.finish();
  }
  if (const Json* v = top.child("radio")) c.layout.radio = radio_from(*v, "radio");
  if (const Json* v = top.child("propagation")) {
    c.layout.propagation = propagation_from(*v, "propagation");
  }
  if (const Json* v = top.child("network")) {
    NetworkLayout& l = c.layout;
    ObjectReader in(*v, "network");
    in.count("n_uavs", l.n_uavs);
    if (const Json* p = in.child("gnb_position")) {
      if (!p->is_null()) l.gnb_position = position_from(*p, in.path("gnb_position"));
    }
    in.number("gnb_height_m", l.gnb_height);
    in.count("gnb_antennas", l.gnb_antennas);
    in.count("uav_antennas", l.uav_antennas);
    in.number("ue_height_m", l.ue_height);
    in.number("uav_edge_margin_m", l.uav_edge_margin);
    if (const Json* a = in.child("uav_altitude_m")) {
      l.uav_altitude = interval_from(*a, in.path("uav_altitude_m"));
    }
    if (const Json* b = in.child("bounds")) {
      if (!b->is_null()) l.bounds = bounds_from(*b, in.path("bounds"));
    }
    in.finish();
  }
  if (const Json* v = top.child("grid")) {
    ObjectReader in(*v, "grid");
    if (in.has("step_m")) {
      double step = 0.0;
      in.number("step_m", step);
      c.grid = GridResolution{step, step, step};
    }
    in.number("dx_m", c.grid.dx);
    in.number("dy_m", c.grid.dy);
    in.number("dz_m", c.grid.dz);
    in.finish();
  }
  if (const Json* v = top.child("solver")) {
    ObjectReader in(*v, "solver");
    std::uint64_t budget = c.pi.candidate_budget;
    in.unsigned_integer("candidate_budget", budget);
    c.pi.candidate_budget = static_cast<std::size_t>(budget);
    in.count("power_levels", c.pi.power_levels);
    in.get("allow_idle_uavs", c.pi.allow_idle_uavs);
    if (in.has("shuffle_seed") && !v->at("shuffle_seed").is_null()) {
      std::uint64_t seed = 0;
      in.unsigned_integer("shuffle_seed", seed);
      c.pi.shuffle_seed = seed;
    }
    std::uint64_t threads = c.pi.threads;
    in.unsigned_integer("threads", threads);
    c.pi.threads = static_cast<unsigned>(threads);
    in.finish();
  }
  top.count("n_csi", c.n_csi);
  top.count("n_trials", c.n_trials);
  top.unsigned_integer("master_seed", c.master_seed);
  top.get("altitudes_m", c.altitudes);
  std::uint64_t threads = c.threads;
  top.unsigned_integer("threads", threads);
  c.threads = static_cast<unsigned>(threads);
  top.get("output_dir", c.output_dir);
  top.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j);
}

Json config_to_json(const ExperimentConfig& c) {
  const NetworkLayout& l = c.layout;
  Json network{{"n_uavs", l.n_uavs},
               {"gnb_position", l.gnb_position ? Json(*l.gnb_position) : Json(nullptr)},
               {"gnb_height_m", l.gnb_height},
               {"gnb_antennas", l.gnb_antennas},
               {"uav_antennas", l.uav_antennas},
               {"ue_height_m", l.ue_height},
               {"uav_edge_margin_m", l.uav_edge_margin},
               {"uav_altitude_m", interval_json(l.uav_altitude)},
               {"bounds", l.bounds ? bounds_json(*l.bounds) : Json(nullptr)}};
  Json solver{{"candidate_budget", c.pi.candidate_budget},
              {"power_levels", c.pi.power_levels},
              {"allow_idle_uavs", c.pi.allow_idle_uavs},
              {"shuffle_seed", optional_json(c.pi.shuffle_seed)},
              {"threads", c.pi.threads}};
  return Json{{"scenario",
               Json{{"kind", c.kind == ScenarioKind::kA ? "A" : "B"},
                    {"n_hotspots", c.scenario_a.n_hotspots},
                    {"ues_per_hotspot", c.scenario_a.ues_per_hotspot},
                    {"hotspot_radius_m", c.scenario_a.hotspot_radius},
                    {"hotspot_ues", c.scenario_b.hotspot_ues},
                    {"background_ues", c.scenario_b.background_ues},
                    {"hotspot_sigma_m", c.scenario_b.hotspot_sigma}}},
              {"area", Json{{"width_m", c.area.width}, {"depth_m", c.area.depth}}},
              {"radio", radio_json(l.radio)},
              {"propagation", propagation_json(l.propagation)},
              {"network", network},
              {"grid", Json{{"dx_m", c.grid.dx}, {"dy_m", c.grid.dy}, {"dz_m", c.grid.dz}}},
              {"solver", solver},
              {"n_csi", c.n_csi},
              {"n_trials", c.n_trials},
              {"master_seed", c.master_seed},
              {"altitudes_m", c.altitudes},
              {"threads", c.threads},
              {"output_dir", c.output_dir}};
}

std::string format_double(double v) {
  char buf[400];
  const double mag = std::abs(v);
  // plain digits for the magnitudes that show up in traces (rates, powers, dB)
  const auto res = (mag >= 1e-4 && mag < 1e16)
                       ? std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed)
                       : std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_trace_csv(std::ostream& os, std::span<const TraceRow> rows) {
  os << "trial,csi_instant,node_id,node_kind,sinr_db,rate_bps\r\n";
  for (const auto& r : rows) {
    os << r.trial << ',' << r.csi_instant << ',' << r.node_id << ',' << csv_field(r.node_kind)
       << ',' << (r.sinr_db ? format_double(*r.sinr_db) : std::string()) << ','
       << format_double(r.rate_bps) << "\r\n";
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace iabsim
