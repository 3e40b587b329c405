#pragma once

#include <span>
#include <vector>

#include "iabsim/channel.hpp"
#include "iabsim/precoding.hpp"
#include "iabsim/scenario.hpp"

namespace iabsim {

/// Station ids: 0 is the gNB, d = 1..D are the UAVs.
inline constexpr int kGnbStation = 0;

/// Per-UE serving station. Member lists per station are kept sorted by UE index.
class Association {
 public:
  Association() = default;
  Association(std::vector<int> serving, int n_uavs);

  static Association all_to_gnb(int n_users, int n_uavs);

  int server(int u) const { return serving_[static_cast<std::size_t>(u)]; }
  bool served_by_uav(int u) const { return server(u) != kGnbStation; }
  const std::vector<int>& users_of(int station) const {
    return members_[static_cast<std::size_t>(station)];
  }
  const std::vector<int>& serving() const { return serving_; }

  int n_users() const { return static_cast<int>(serving_.size()); }
  int n_uavs() const { return static_cast<int>(members_.size()) - 1; }

  /// A UAV is active iff it serves at least one aUE; only active UAVs get a backhaul beam.
  bool uav_active(int d) const { return !users_of(d).empty(); }
  std::vector<int> active_uavs() const;

  friend bool operator==(const Association& a, const Association& b) {
    return a.serving_ == b.serving_ && a.members_ == b.members_;
  }

 private:
  std::vector<int> serving_;
  std::vector<std::vector<int>> members_ = {{}};
};

/**
 * Which UEs share a frequency resource. Each station splits the band into one
 * subband per served UE; the UE in position i of station A is aligned with the
 * UE in position (i mod n_B) of station B.
 */
struct CoScheduling {
  std::vector<std::vector<int>> partner;  // [u][station] -> UE index, -1 if none
  int gnb_subbands = 1;                   // max(1, number of tUEs)
  std::vector<int> gnb_subband;           // [u] gNB subband overlapping UE u's resource
};

CoScheduling schedule_coresources(const Association& association);

struct PowerAllocation {
  std::vector<double> ue_power;  // [u] W, serving station's transmit power on u's subband
  std::vector<double> bh_power;  // [d-1] W, gNB transmit power on backhaul beam d per subband

  friend bool operator==(const PowerAllocation&, const PowerAllocation&) = default;
};

struct ServingPlan {
  Association association;
  CoScheduling schedule;
  PowerAllocation powers;
};

ServingPlan make_plan(Association association, PowerAllocation powers);

/// One gNB subband: zero-forcing over [active backhaul links..., scheduled tUE].
struct GnbSubband {
  std::vector<int> bh_uavs;
  int tue = -1;
  Precoder precoder;

  int n_links() const { return static_cast<int>(bh_uavs.size()) + (tue >= 0 ? 1 : 0); }
  int row_of_uav(int d) const;
  int tue_row() const { return tue >= 0 ? static_cast<int>(bh_uavs.size()) : -1; }
};

struct GnbTransmission {
  std::vector<GnbSubband> subbands;
  double budget_per_subband = 0.0;

  double transmit_power() const;
};

/// Stacked channel rows of the given backhaul links followed by the tUE (if any).
ComplexMatrix gnb_channel_matrix(const ChannelState& channels, std::span<const int> bh_uavs,
                                 int tue);

/**
 * Builds the per-subband precoders and loads the plan's gNB transmit powers
 * (power_diag = transmit / cost), each subband capped at gnb_max_power / subbands.
 */
GnbTransmission build_gnb_transmission(const ChannelState& channels, const ServingPlan& plan,
                                       double gnb_max_power);

// Instantaneous SINR at one CSI instant.
double sinr_aue(int u, const ChannelState& channels, const ServingPlan& plan,
                const GnbTransmission& tx, double noise_power);
double sinr_tue(int u, const ChannelState& channels, const ServingPlan& plan,
                const GnbTransmission& tx, double noise_power);
/// Worst backhaul SINR of UAV d over the gNB subbands; 0 for an inactive UAV.
double sinr_bh(int d, const ChannelState& channels, const ServingPlan& plan,
               const GnbTransmission& tx, double noise_power);

/// Interference-plus-noise seen by backhaul row `row` of subband `s` (excluding own signal).
double bh_interference(int d, int s, const ChannelState& channels, const ServingPlan& plan,
                       const GnbTransmission& tx, double noise_power);
/// Interference-plus-noise seen by the tUE of subband `s`.
double tue_interference(int s, const ChannelState& channels, const ServingPlan& plan,
                        const GnbTransmission& tx, double noise_power);

// Average SINR from large-scale gains only.
double avg_sinr_aue(int u, const LargeScaleGains& gains, const ServingPlan& plan,
                    double noise_power);
double avg_sinr_tue(int u, const LargeScaleGains& gains, const ServingPlan& plan,
                    double noise_power);
double avg_sinr_bh(int d, const LargeScaleGains& gains, const ServingPlan& plan,
                   double noise_power);

struct LinkReport {
  std::vector<double> sinr;     // [u] linear
  std::vector<double> sinr_bh;  // [d-1] linear
  std::vector<double> rate;     // [u] bit/s
  double sum_rate = 0.0;        // bit/s

  friend bool operator==(const LinkReport&, const LinkReport&) = default;
};

/// rate[u] = B / n_share(u) * log2(1 + sinr[u]), n_share = UEs on u's station.
LinkReport sum_rate(std::vector<double> sinr, std::vector<double> sinr_bh,
                    const Association& association, double bandwidth);

LinkReport evaluate_instant(const ChannelState& channels, const ServingPlan& plan,
                            const GnbTransmission& tx, const RadioConfig& radio);

LinkReport evaluate_average(const LargeScaleGains& gains, const ServingPlan& plan,
                            const RadioConfig& radio);

}  // namespace iabsim
