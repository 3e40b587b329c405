#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "iabsim/channel.hpp"
#include "iabsim/linkmetrics.hpp"

namespace iabsim {

/**
 * Per-subband power allocation problem for the gNB links.
 *
 * Under exact zero-forcing the SINR of link m is P_m / effective_noise[m],
 * with P_m the received power on the link (power_diag) and the radiated power
 * P_m * beam_cost[m].
 */
struct PiiInstance {
  std::vector<double> effective_noise;  // W, interference-plus-noise seen by each link
  std::vector<double> beam_cost;        // ||v_m||^2
  std::vector<double> floors;           // W, minimum P_m meeting the link's threshold
  double budget = 0.0;                  // W, radiated power available on the subband

  std::size_t size() const { return effective_noise.size(); }
  bool feasible() const;
};

class InfeasibleInstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Instance for subband `s`; UAV-side interference is taken at the plan's current powers.
PiiInstance build_instance(int s, const ChannelState& channels, const ServingPlan& plan,
                           const GnbTransmission& tx, const RadioConfig& radio);

/// Water-filling with floors; the returned powers never exceed the budget.
std::vector<double> solve_waterfilling(const PiiInstance& instance);

/// sum_m log2(1 + P_m / effective_noise[m]).
double pii_objective(const PiiInstance& instance, std::span<const double> powers);

struct PiiOutcome {
  ServingPlan plan;       // gNB entries hold the radiated powers after the update
  GnbTransmission tx;
  LinkReport report;
  int infeasible_subbands = 0;  // subbands whose floors exceed the budget
};

/**
 * Re-allocates every gNB subband. An infeasible subband keeps its floors,
 * scaled down to the budget.
 */
PiiOutcome apply_pii(const ChannelState& channels, const ServingPlan& plan,
                     const GnbTransmission& tx, const RadioConfig& radio);

}  // namespace iabsim
