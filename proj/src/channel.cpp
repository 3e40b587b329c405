#include "iabsim/channel.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace iabsim {

double los_probability(double elevation_deg, const PropagationParams& p) {
  if (!(elevation_deg >= 0.0 && elevation_deg <= 90.0)) {
    throw std::out_of_range("elevation angle must lie in [0, 90] degrees");
  }
  return 1.0 / (1.0 + p.los_a * std::exp(-p.los_b * (elevation_deg - p.los_a)));
}

double free_space_pathloss_db(double distance, double freq) {
  if (!(distance > 0.0)) throw std::invalid_argument("distance must be positive");
  return 20.0 * std::log10(4.0 * kPi * distance * freq / kSpeedOfLight);
}

double atg_pathloss_db(double distance, double elevation_deg, double freq,
                       const PropagationParams& p) {
  const double p_los = los_probability(elevation_deg, p);
  return free_space_pathloss_db(distance, freq) + p.eta_los_db * p_los +
         p.eta_nlos_db * (1.0 - p_los);
}

double terrestrial_pathloss_db(double distance, double ue_height, double freq) {
  if (!(distance > 0.0)) throw std::invalid_argument("distance must be positive");
  return 13.54 + 39.08 * std::log10(distance) + 20.0 * std::log10(freq / 1e9) -
         0.6 * (ue_height - 1.5);
}

double elevation_angle_deg(const Position3D& a, const Position3D& b) {
  const double rad = std::atan2(std::abs(a.z - b.z), horizontal_distance(a, b));
  return rad * 180.0 / kPi;
}

double atg_gain(const Position3D& a, const Position3D& b, double freq,
                const PropagationParams& params) {
  const double d = distance(a, b);
  if (!(d > 0.0)) throw GeometryError("coincident transmitter and receiver");
  return average_gain(atg_pathloss_db(d, elevation_angle_deg(a, b), freq, params));
}

double terrestrial_gain(const Position3D& gnb, const Position3D& ue, double freq) {
  const double d = distance(gnb, ue);
  if (!(d > 0.0)) throw GeometryError("coincident transmitter and receiver");
  return average_gain(terrestrial_pathloss_db(d, ue.z, freq));
}

namespace {

std::complex<double> complex_normal(RngStream& rng) {
  // CN(0,1): each quadrature carries half the power
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

}  // namespace

ComplexRow draw_rician_miso(int n_tx, double k_factor, RngStream& rng) {
  if (n_tx < 1) throw std::invalid_argument("n_tx must be at least 1");
  if (!(k_factor >= 0.0)) throw std::invalid_argument("K-factor must be non-negative");
  double w_los = 1.0;
  double w_nlos = 0.0;
  if (std::isfinite(k_factor)) {
    w_los = std::sqrt(k_factor / (k_factor + 1.0));
    w_nlos = std::sqrt(1.0 / (k_factor + 1.0));
  }
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  ComplexRow h(n_tx);
  for (int i = 0; i < n_tx; ++i) {
    const double phi = phase(rng);
    const std::complex<double> scatter = complex_normal(rng);
    h(i) = w_los * std::polar(1.0, phi) + w_nlos * scatter;
  }
  return h;
}

ComplexRow draw_rayleigh_miso(int n_tx, RngStream& rng) {
  if (n_tx < 1) throw std::invalid_argument("n_tx must be at least 1");
  ComplexRow h(n_tx);
  for (int i = 0; i < n_tx; ++i) h(i) = complex_normal(rng);
  return h;
}

namespace {

bool is_active(std::span<const char> active, int d) {
  return active.empty() || active[static_cast<std::size_t>(d)] != 0;
}

void check_inputs(const Scenario& s, std::span<const Position3D> uav_positions,
                  std::span<const char> active) {
  if (static_cast<int>(uav_positions.size()) != s.num_uavs()) {
    throw std::invalid_argument("expected one position per UAV");
  }
  if (!active.empty() && active.size() != uav_positions.size()) {
    throw std::invalid_argument("active mask must have one flag per UAV");
  }
}

enum LinkKind : std::uint64_t { kGnbUe = 1, kGnbUav = 2, kUavUe = 3, kUavUav = 4 };

}  // namespace

LargeScaleGains large_scale_gains(const Scenario& s, std::span<const Position3D> uav_positions,
                                  std::span<const char> active) {
  check_inputs(s, uav_positions, active);
  const double f = s.radio.carrier_freq;
  const auto n_u = static_cast<std::size_t>(s.num_users());
  const auto n_d = static_cast<std::size_t>(s.num_uavs());

  LargeScaleGains g;
  g.gnb_to_ue.resize(n_u);
  for (std::size_t u = 0; u < n_u; ++u) {
    g.gnb_to_ue[u] = terrestrial_gain(s.gnb.position, s.users[u].position, f);
  }
  g.uav_to_ue.assign(n_d, std::vector<double>(n_u, 0.0));
  g.gnb_to_uav.assign(n_d, 0.0);
  g.uav_to_uav.assign(n_d, std::vector<double>(n_d, 0.0));
  for (std::size_t d = 0; d < n_d; ++d) {
    if (!is_active(active, static_cast<int>(d))) continue;
    for (std::size_t u = 0; u < n_u; ++u) {
      g.uav_to_ue[d][u] = atg_gain(uav_positions[d], s.users[u].position, f, s.propagation);
    }
    g.gnb_to_uav[d] = atg_gain(s.gnb.position, uav_positions[d], f, s.propagation);
    for (std::size_t j = 0; j < n_d; ++j) {
      if (j == d || !is_active(active, static_cast<int>(j))) continue;
      g.uav_to_uav[j][d] = atg_gain(uav_positions[j], uav_positions[d], f, s.propagation);
    }
  }
  return g;
}

ChannelState realize_channels(const Scenario& s, std::span<const Position3D> uav_positions,
                              std::uint64_t stream_seed, std::span<const char> active) {
  ChannelState cs;
  cs.gains = large_scale_gains(s, uav_positions, active);
  const double k = db_to_linear(s.propagation.k_factor_db);
  const int n_g = s.gnb.n_tx_antennas;
  const auto n_u = static_cast<std::size_t>(s.num_users());
  const auto n_d = static_cast<std::size_t>(s.num_uavs());

  auto scaled = [](ComplexRow f, double gain) {
    const double n = static_cast<double>(f.size());
    f *= std::sqrt(gain / n);
    return f;
  };

  cs.gnb_to_ue.resize(n_u);
  for (std::size_t u = 0; u < n_u; ++u) {
    RngStream rng(derive_seed(stream_seed, {kGnbUe, u}));
    cs.gnb_to_ue[u] = scaled(draw_rayleigh_miso(n_g, rng), cs.gains.gnb_to_ue[u]);
  }

  cs.gnb_to_uav.assign(n_d, ComplexRow::Zero(n_g));
  cs.uav_to_ue.assign(n_d, std::vector<ComplexRow>(n_u));
  cs.uav_to_uav.assign(n_d, std::vector<ComplexRow>(n_d));
  for (std::size_t d = 0; d < n_d; ++d) {
    const int n_a = s.uavs[d].n_tx_antennas;
    const bool on = is_active(active, static_cast<int>(d));
    for (std::size_t u = 0; u < n_u; ++u) {
      if (!on) {
        cs.uav_to_ue[d][u] = ComplexRow::Zero(n_a);
        continue;
      }
      RngStream rng(derive_seed(stream_seed, {kUavUe, d, u}));
      cs.uav_to_ue[d][u] = scaled(draw_rician_miso(n_a, k, rng), cs.gains.uav_to_ue[d][u]);
    }
    if (on) {
      RngStream rng(derive_seed(stream_seed, {kGnbUav, d}));
      cs.gnb_to_uav[d] = scaled(draw_rician_miso(n_g, k, rng), cs.gains.gnb_to_uav[d]);
    }
    for (std::size_t j = 0; j < n_d; ++j) {
      const int n_j = s.uavs[j].n_tx_antennas;
      if (j == d || !on || !is_active(active, static_cast<int>(j))) {
        cs.uav_to_uav[j][d] = ComplexRow::Zero(n_j);
        continue;
      }
      RngStream rng(derive_seed(stream_seed, {kUavUav, j, d}));
      cs.uav_to_uav[j][d] = scaled(draw_rician_miso(n_j, k, rng), cs.gains.uav_to_uav[j][d]);
    }
  }
  return cs;
}

}  // namespace iabsim
