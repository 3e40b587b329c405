#include "iabsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "iabsim/rng.hpp"

namespace iabsim {

double distance(const Position3D& a, const Position3D& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double horizontal_distance(const Position3D& a, const Position3D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

AltitudeBounds resolve_bounds(const NetworkLayout& layout, const ServiceArea& area) {
  if (layout.bounds) return *layout.bounds;
  const double mx = std::min(layout.uav_edge_margin, area.width / 2.0);
  const double my = std::min(layout.uav_edge_margin, area.depth / 2.0);
  return AltitudeBounds{{mx, area.width - mx}, {my, area.depth - my}, layout.uav_altitude};
}

namespace {

void check_area(const ServiceArea& area) {
  if (!(area.width > 0.0) || !(area.depth > 0.0)) {
    throw std::invalid_argument("service area dimensions must be positive");
  }
}

// gNB, UAV tier and bounds shared by both generators. UAVs start at the
// bounds center on the lowest altitude; placement is decided by the P-I solver.
Scenario base_scenario(const NetworkLayout& layout, const ServiceArea& area) {
  Scenario s;
  s.radio = layout.radio;
  s.propagation = layout.propagation;
  s.area = area;
  s.bounds = resolve_bounds(layout, area);
  s.gnb.position = layout.gnb_position.value_or(
      Position3D{area.width / 2.0, area.depth / 2.0, layout.gnb_height});
  s.gnb.n_tx_antennas = layout.gnb_antennas;
  const Position3D parking{(s.bounds.x.min + s.bounds.x.max) / 2.0,
                           (s.bounds.y.min + s.bounds.y.max) / 2.0, s.bounds.z.min};
  for (int d = 1; d <= layout.n_uavs; ++d) {
    s.uavs.push_back(UavNode{d, parking, layout.uav_antennas});
  }
  return s;
}

}  // namespace

Scenario generate_scenario_a(const ScenarioAParams& params, const ServiceArea& area,
                             std::uint64_t seed, const NetworkLayout& layout) {
  check_area(area);
  if (params.n_hotspots < 1) throw std::invalid_argument("scenario A needs at least one hotspot");
  if (params.ues_per_hotspot < 1) throw std::invalid_argument("scenario A needs at least one UE per hotspot");
  if (params.hotspot_radius < 0.0) throw std::invalid_argument("hotspot radius must be non-negative");
  if (params.hotspot_radius > std::min(area.width, area.depth) / 2.0) {
    throw std::invalid_argument("hotspot radius exceeds half the smaller area dimension");
  }

  Scenario s = base_scenario(layout, area);
  RngStream rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = params.hotspot_radius;

  int index = 1;
  for (int h = 0; h < params.n_hotspots; ++h) {
    // centers keep the whole disc inside the area
    const double cx = r + unit(rng) * (area.width - 2.0 * r);
    const double cy = r + unit(rng) * (area.depth - 2.0 * r);
    for (int k = 0; k < params.ues_per_hotspot; ++k) {
      const double rho = r * std::sqrt(unit(rng));
      const double phi = 2.0 * kPi * unit(rng);
      const double x = std::clamp(cx + rho * std::cos(phi), 0.0, area.width);
      const double y = std::clamp(cy + rho * std::sin(phi), 0.0, area.depth);
      s.users.push_back(UserNode{index++, {x, y, layout.ue_height}});
    }
  }
  return s;
}

Scenario generate_scenario_b(const ScenarioBParams& params, const ServiceArea& area,
                             std::uint64_t seed, const NetworkLayout& layout) {
  check_area(area);
  if (params.hotspot_ues < 0 || params.background_ues < 0) {
    throw std::invalid_argument("UE counts must be non-negative");
  }
  if (params.hotspot_ues + params.background_ues == 0) {
    throw std::invalid_argument("scenario B needs at least one UE");
  }
  if (params.hotspot_sigma < 0.0) throw std::invalid_argument("hotspot sigma must be non-negative");

  Scenario s = base_scenario(layout, area);
  RngStream rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double cx = unit(rng) * area.width;
  const double cy = unit(rng) * area.depth;
  int index = 1;
  for (int k = 0; k < params.hotspot_ues; ++k) {
    const double x = std::clamp(cx + params.hotspot_sigma * normal(rng), 0.0, area.width);
    const double y = std::clamp(cy + params.hotspot_sigma * normal(rng), 0.0, area.depth);
    s.users.push_back(UserNode{index++, {x, y, layout.ue_height}});
  }
  for (int k = 0; k < params.background_ues; ++k) {
    const double x = unit(rng) * area.width;
    const double y = unit(rng) * area.depth;
    s.users.push_back(UserNode{index++, {x, y, layout.ue_height}});
  }
  return s;
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> out;
  auto fail = [&out](const std::string& msg) { out.push_back(msg); };
  auto fmt_pos = [](const Position3D& p) {
    std::ostringstream os;
    os << "(" << p.x << ", " << p.y << ", " << p.z << ")";
    return os.str();
  };

  const RadioConfig& r = s.radio;
  if (!(r.carrier_freq > 0.0)) fail("radio.carrier_freq must be positive");
  if (!(r.bandwidth > 0.0)) fail("radio.bandwidth must be positive");
  if (!(r.noise_power > 0.0)) fail("radio.noise_power must be positive");
  if (!(r.gnb_max_power > 0.0)) fail("radio.gnb_max_power must be positive");
  if (!(r.uav_max_power > 0.0)) fail("radio.uav_max_power must be positive");
  if (!(r.sinr_threshold_ue > 0.0)) fail("radio.sinr_threshold_ue must be positive");
  if (!(r.sinr_threshold_bh > 0.0)) fail("radio.sinr_threshold_bh must be positive");
  if (r.sinr_threshold_bh < r.sinr_threshold_ue) {
    fail("radio.sinr_threshold_bh must not be below radio.sinr_threshold_ue");
  }

  if (!(s.area.width > 0.0) || !(s.area.depth > 0.0)) fail("area dimensions must be positive");
  for (const auto& [name, iv] : {std::pair{"x", s.bounds.x}, std::pair{"y", s.bounds.y},
                                 std::pair{"z", s.bounds.z}}) {
    if (iv.min > iv.max) fail(std::string("bounds.") + name + " has min > max");
  }

  const int d_count = s.num_uavs();
  if (s.gnb.n_tx_antennas < 1) fail("gnb.n_tx_antennas must be at least 1");
  if (s.gnb.n_tx_antennas < d_count + 1) {
    fail("gnb.n_tx_antennas (" + std::to_string(s.gnb.n_tx_antennas) +
         ") is below the number of reception points D+1 = " + std::to_string(d_count + 1));
  }
  if (s.gnb.position.z < 0.0) fail("gnb.position.z must be non-negative");

  for (int i = 0; i < d_count; ++i) {
    const UavNode& uav = s.uavs[static_cast<std::size_t>(i)];
    const std::string tag = "uav " + std::to_string(uav.index);
    if (uav.index != i + 1) fail(tag + ": indices must run 1..D without gaps");
    if (uav.n_tx_antennas < 1) fail(tag + ": n_tx_antennas must be at least 1");
    if (uav.position.z < 0.0) fail(tag + ": z must be non-negative");
    if (!s.bounds.contains(uav.position)) {
      fail(tag + " at " + fmt_pos(uav.position) + " lies outside the altitude bounds");
    }
  }

  for (std::size_t i = 0; i < s.users.size(); ++i) {
    const UserNode& ue = s.users[i];
    const std::string tag = "ue " + std::to_string(ue.index);
    if (ue.index != static_cast<int>(i) + 1) fail(tag + ": indices must run 1..U without gaps");
    if (ue.position.z < 0.0) fail(tag + ": z must be non-negative");
    if (ue.position.x < 0.0 || ue.position.x > s.area.width || ue.position.y < 0.0 ||
        ue.position.y > s.area.depth) {
      fail(tag + " at " + fmt_pos(ue.position) + " lies outside the service area");
    }
  }
  return out;
}

Scenario without_uavs(Scenario scenario) {
  scenario.uavs.clear();
  return scenario;
}

}  // namespace iabsim
