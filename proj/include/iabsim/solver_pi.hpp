#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iabsim/channel.hpp"
#include "iabsim/linkmetrics.hpp"
#include "iabsim/scenario.hpp"

namespace iabsim {

struct GridResolution {
  double dx = 100.0;
  double dy = 100.0;
  double dz = 100.0;

  friend bool operator==(const GridResolution&, const GridResolution&) = default;
};

/// Cartesian product of per-axis samples, enumerated x-major so that the
/// flat index order equals lexicographic (x, y, z) order.
struct PlacementGrid {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> zs;

  std::size_t size() const { return xs.size() * ys.size() * zs.size(); }
  Position3D at(std::size_t i) const;
  std::vector<Position3D> points() const;
};

/// Inclusive samples min, min+step, ..., with max always the last sample.
std::vector<double> axis_samples(const Interval& axis, double step);

PlacementGrid enumerate_grid(const AltitudeBounds& bounds, const GridResolution& resolution);

/// candidate[station][u]: power station would use towards UE u when competing for it.
using CandidatePowers = std::vector<std::vector<double>>;

/// Station max powers for every UE; idle UAVs (flag set) offer zero power.
CandidatePowers station_max_powers(const Scenario& scenario, std::span<const char> idle = {});

/// Max average received power association; ties go to the lowest station id.
Association associate(const LargeScaleGains& gains, const CandidatePowers& candidate);

Association associate(const Scenario& scenario, std::span<const Position3D> uav_positions,
                      const CandidatePowers& candidate);

struct PowerDecision {
  PowerAllocation powers;
  bool within_budget = true;  // false when minimal backhaul power alone exceeds a subband budget
};

/**
 * Equal split of each station's power over its UEs (scaled by level / n_levels
 * when a level vector is given), minimal backhaul power meeting the backhaul
 * threshold with equality, and the remainder of each gNB subband budget for the tUE.
 */
PowerDecision allocate_powers(const Scenario& scenario, const Association& association,
                              const LargeScaleGains& gains, std::span<const int> ue_levels = {},
                              int n_levels = 1);

struct FeasibilityReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Relative slack applied to SINR thresholds so that powers solved to meet a
/// threshold with equality are not rejected by rounding.
inline constexpr double kThresholdSlack = 1e-9;

FeasibilityReport feasible(const Scenario& scenario, const ServingPlan& plan,
                           const LargeScaleGains& gains);

struct Solution {
  std::vector<Position3D> uav_positions;  // C, one column per UAV
  std::vector<char> uav_idle;             // idle UAVs were switched off by the search
  Association association;
  PowerAllocation powers;
  std::vector<int> power_levels;          // per-UE level, empty for the closed-form rule
  LinkReport average;                     // average SINRs and rates at the optimum
  double avg_sum_rate = 0.0;              // bit/s
  bool feasible = false;
  std::vector<std::string> violations;
  std::size_t candidates_evaluated = 0;

  friend bool operator==(const Solution&, const Solution&) = default;
};

struct PiOptions {
  std::size_t candidate_budget = 1'000'000;
  int power_levels = 1;          // L levels per UE; 1 is the closed-form equal split
  bool allow_idle_uavs = false;  // each UAV may additionally stay off
  std::optional<std::uint64_t> shuffle_seed;  // permutes evaluation order only
  unsigned threads = 1;

  friend bool operator==(const PiOptions&, const PiOptions&) = default;
};

class CandidateBudgetError : public std::runtime_error {
 public:
  CandidateBudgetError(const std::string& what, long double count)
      : std::runtime_error(what), count_(count) {}
  long double count() const { return count_; }

 private:
  long double count_;
};

/// Number of candidates solve_pi would evaluate (position tuples x level vectors).
long double candidate_count(const Scenario& scenario, const PlacementGrid& grid,
                            const PiOptions& options);

/// Full evaluation of one candidate: association, powers, feasibility, objective.
Solution evaluate_candidate(const Scenario& scenario, std::span<const Position3D> uav_positions,
                            std::span<const char> idle = {}, std::span<const int> ue_levels = {},
                            int n_levels = 1);

/// Exhaustive search over every D-tuple of grid points (and level vectors).
Solution solve_pi(const Scenario& scenario, const PlacementGrid& grid,
                  const PiOptions& options = {});

}  // namespace iabsim
