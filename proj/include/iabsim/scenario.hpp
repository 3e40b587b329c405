#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iabsim/units.hpp"

namespace iabsim {

/// Radio parameters. Powers in W, thresholds as linear ratios.
struct RadioConfig {
  double carrier_freq = 2.0e9;                      // Hz
  double bandwidth = 20.0e6;                        // Hz
  double noise_power = dbm_to_watts(-104.0);        // W over the full band
  double gnb_max_power = dbm_to_watts(46.0);        // W
  double uav_max_power = dbm_to_watts(36.0);        // W
  double sinr_threshold_ue = db_to_linear(3.0);
  double sinr_threshold_bh = db_to_linear(10.0);

  friend bool operator==(const RadioConfig&, const RadioConfig&) = default;
};

/// Propagation constants of the air-to-ground and fading models.
struct PropagationParams {
  double los_a = 9.61;        // urban LOS-probability curve parameters
  double los_b = 0.16;
  double eta_los_db = 1.0;    // excess loss over free space
  double eta_nlos_db = 20.0;
  double k_factor_db = 10.0;  // Rician K of ATG access and GTA backhaul links

  friend bool operator==(const PropagationParams&, const PropagationParams&) = default;
};

struct Position3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position3D&, const Position3D&) = default;
  friend auto operator<=>(const Position3D&, const Position3D&) = default;
};

double distance(const Position3D& a, const Position3D& b);
double horizontal_distance(const Position3D& a, const Position3D& b);

struct GnbNode {
  Position3D position{750.0, 750.0, 25.0};
  int n_tx_antennas = 8;

  friend bool operator==(const GnbNode&, const GnbNode&) = default;
};

struct UavNode {
  int index = 1;  // 1..D
  Position3D position;
  int n_tx_antennas = 2;

  friend bool operator==(const UavNode&, const UavNode&) = default;
};

struct UserNode {
  int index = 1;  // 1..U
  Position3D position;

  friend bool operator==(const UserNode&, const UserNode&) = default;
};

struct Interval {
  double min = 0.0;
  double max = 0.0;

  bool contains(double v) const { return v >= min && v <= max; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Box of admissible UAV hovering positions.
struct AltitudeBounds {
  Interval x;
  Interval y;
  Interval z{100.0, 500.0};

  bool contains(const Position3D& p) const {
    return x.contains(p.x) && y.contains(p.y) && z.contains(p.z);
  }
  friend bool operator==(const AltitudeBounds&, const AltitudeBounds&) = default;
};

struct ServiceArea {
  double width = 1500.0;  // m, x extent starting at 0
  double depth = 1500.0;  // m, y extent starting at 0

  friend bool operator==(const ServiceArea&, const ServiceArea&) = default;
};

struct Scenario {
  RadioConfig radio;
  PropagationParams propagation;
  GnbNode gnb;
  std::vector<UavNode> uavs;
  std::vector<UserNode> users;
  AltitudeBounds bounds;
  ServiceArea area;

  int num_uavs() const { return static_cast<int>(uavs.size()); }
  int num_users() const { return static_cast<int>(users.size()); }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Everything a generated scenario needs besides the UE drop.
struct NetworkLayout {
  RadioConfig radio;
  PropagationParams propagation;
  std::optional<Position3D> gnb_position;  // defaults to the area center
  double gnb_height = 25.0;
  int gnb_antennas = 8;
  int n_uavs = 1;
  int uav_antennas = 2;
  double ue_height = 1.5;
  double uav_edge_margin = 50.0;           // horizontal keep-out from the area border
  Interval uav_altitude{100.0, 500.0};
  std::optional<AltitudeBounds> bounds;    // overrides margin/altitude when set

  friend bool operator==(const NetworkLayout&, const NetworkLayout&) = default;
};

/// Multiple hotspots, UEs uniform in a disc around each center.
struct ScenarioAParams {
  int n_hotspots = 2;
  int ues_per_hotspot = 2;
  double hotspot_radius = 100.0;  // m

  friend bool operator==(const ScenarioAParams&, const ScenarioAParams&) = default;
};

/// One Gaussian hotspot plus uniformly dropped background UEs.
struct ScenarioBParams {
  int hotspot_ues = 6;
  int background_ues = 2;
  double hotspot_sigma = 100.0;  // m, per-axis standard deviation

  friend bool operator==(const ScenarioBParams&, const ScenarioBParams&) = default;
};

AltitudeBounds resolve_bounds(const NetworkLayout& layout, const ServiceArea& area);

Scenario generate_scenario_a(const ScenarioAParams& params, const ServiceArea& area,
                             std::uint64_t seed, const NetworkLayout& layout = {});

Scenario generate_scenario_b(const ScenarioBParams& params, const ServiceArea& area,
                             std::uint64_t seed, const NetworkLayout& layout = {});

/// Returns every violated invariant; an empty list means the scenario is valid.
std::vector<std::string> validate(const Scenario& scenario);

/// Same network with the UAV tier removed (no-UAV reference case).
Scenario without_uavs(Scenario scenario);

}  // namespace iabsim
