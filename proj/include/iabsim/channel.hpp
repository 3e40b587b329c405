#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "iabsim/rng.hpp"
#include "iabsim/scenario.hpp"

namespace iabsim {

using ComplexRow = Eigen::RowVectorXcd;

/// Thrown when a transmitter and receiver share a position.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Probability of line of sight on an air-to-ground link, angle in degrees [0, 90].
double los_probability(double elevation_deg, const PropagationParams& params = {});

/// 20 log10(4 pi d f / c).
double free_space_pathloss_db(double distance, double freq);

/// Free-space loss plus the LOS/NLOS-weighted excess loss.
double atg_pathloss_db(double distance, double elevation_deg, double freq,
                       const PropagationParams& params = {});

/// Urban-macro NLOS closed form for gNB to terrestrial UE links.
double terrestrial_pathloss_db(double distance, double ue_height, double freq);

inline double average_gain(double pathloss_db) { return std::pow(10.0, -pathloss_db / 10.0); }

/// atan2(|dz|, horizontal distance) in degrees.
double elevation_angle_deg(const Position3D& a, const Position3D& b);

/// Average gain of the link between an airborne node and any other node.
/// Symmetric in its arguments, which is what makes GTA and ATG reciprocal.
double atg_gain(const Position3D& a, const Position3D& b, double freq,
                const PropagationParams& params);

double terrestrial_gain(const Position3D& gnb, const Position3D& ue, double freq);

/// Unit-mean-power Rician MISO vector. k_factor is linear; +inf gives the pure LOS part.
ComplexRow draw_rician_miso(int n_tx, double k_factor, RngStream& rng);

/// i.i.d. CN(0,1) MISO vector.
ComplexRow draw_rayleigh_miso(int n_tx, RngStream& rng);

/// Average (large-scale) linear gains h~ = 1/L~. Entries of inactive UAVs are 0.
struct LargeScaleGains {
  std::vector<double> gnb_to_ue;                  // [u]
  std::vector<std::vector<double>> uav_to_ue;     // [d-1][u]
  std::vector<double> gnb_to_uav;                 // [d-1]
  std::vector<std::vector<double>> uav_to_uav;    // [j-1][d-1], zero on the diagonal
};

/**
 * One CSI instant. Every MISO vector is stored as h = sqrt(g / N) * f where g
 * is the large-scale gain and f has unit mean power per entry, so E||h||^2 = g.
 */
struct ChannelState {
  LargeScaleGains gains;
  std::vector<ComplexRow> gnb_to_ue;                 // [u], length N_g
  std::vector<ComplexRow> gnb_to_uav;                // [d-1], length N_g
  std::vector<std::vector<ComplexRow>> uav_to_ue;    // [d-1][u], length N_d
  std::vector<std::vector<ComplexRow>> uav_to_uav;   // [j-1][d-1], length N_j
};

/// `active` may be empty (all UAVs active) or hold one flag per UAV.
LargeScaleGains large_scale_gains(const Scenario& scenario,
                                  std::span<const Position3D> uav_positions,
                                  std::span<const char> active = {});

/**
 * Draws all fading vectors for one CSI instant. Each link owns a stream
 * derived from `stream_seed` and the link identity, so the realization of a
 * link does not depend on which other links exist or on evaluation order.
 */
ChannelState realize_channels(const Scenario& scenario,
                              std::span<const Position3D> uav_positions,
                              std::uint64_t stream_seed,
                              std::span<const char> active = {});

}  // namespace iabsim
