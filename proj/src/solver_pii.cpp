#include "iabsim/solver_pii.hpp"

#include <algorithm>
#include <cmath>

namespace iabsim {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

std::vector<double> level_powers(const PiiInstance& in, double mu) {
  std::vector<double> p(in.size());
  for (std::size_t m = 0; m < in.size(); ++m) {
    p[m] = std::max(in.floors[m], mu / in.beam_cost[m] - in.effective_noise[m]);
  }
  return p;
}

// Interference from the UAV tier into backhaul receiver d; gNB beams are nulled by ZF.
double uav_tier_into_uav(int d, const ChannelState& ch, const ServingPlan& plan) {
  const Association& a = plan.association;
  double total = 0.0;
  for (int j = 1; j <= a.n_uavs(); ++j) {
    if (j == d) continue;
    double p = 0.0;
    for (int i : a.users_of(j)) p += plan.powers.ue_power[idx(i)];
    if (p > 0.0) total += p * ch.uav_to_uav[idx(j - 1)][idx(d - 1)].squaredNorm();
  }
  return total;
}

double uav_tier_into_ue(int u, const ChannelState& ch, const ServingPlan& plan) {
  const Association& a = plan.association;
  double total = 0.0;
  for (int j = 1; j <= a.n_uavs(); ++j) {
    const int p = plan.schedule.partner[idx(u)][idx(j)];
    if (p >= 0) total += plan.powers.ue_power[idx(p)] * ch.uav_to_ue[idx(j - 1)][idx(u)].squaredNorm();
  }
  return total;
}

}  // namespace

bool PiiInstance::feasible() const {
  return trace_power(floors, beam_cost) <= budget;
}

PiiInstance build_instance(int s, const ChannelState& ch, const ServingPlan& plan,
                           const GnbTransmission& tx, const RadioConfig& radio) {
  const GnbSubband& sb = tx.subbands.at(idx(s));
  PiiInstance in;
  in.budget = tx.budget_per_subband;
  in.beam_cost = sb.precoder.costs();
  for (int d : sb.bh_uavs) {
    const double n = uav_tier_into_uav(d, ch, plan) + radio.noise_power;
    in.effective_noise.push_back(n);
    in.floors.push_back(radio.sinr_threshold_bh * n);
  }
  if (sb.tue >= 0) {
    const double n = uav_tier_into_ue(sb.tue, ch, plan) + radio.noise_power;
    in.effective_noise.push_back(n);
    in.floors.push_back(radio.sinr_threshold_ue * n);
  }
  return in;
}

std::vector<double> solve_waterfilling(const PiiInstance& in) {
  const std::size_t m = in.size();
  if (in.beam_cost.size() != m || in.floors.size() != m) {
    throw std::invalid_argument("instance vectors differ in length");
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (!(in.beam_cost[k] > 0.0) || !(in.effective_noise[k] > 0.0) || in.floors[k] < 0.0) {
      throw std::invalid_argument("instance needs positive costs and noises, non-negative floors");
    }
  }
  if (!in.feasible()) throw InfeasibleInstanceError("SINR floors exceed the power budget");
  if (m == 0) return {};

  double lo = 0.0;
  double hi = in.budget;
  for (std::size_t k = 0; k < m; ++k) {
    hi = std::max(hi, in.budget + in.beam_cost[k] * (in.effective_noise[k] + in.floors[k]));
  }
  const double tol = 1e-12 * std::max(in.budget, 1e-300);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double t = trace_power(level_powers(in, mid), in.beam_cost);
    if (t > in.budget) {
      hi = mid;
    } else {
      lo = mid;
      if (in.budget - t <= tol) break;
    }
  }
  return level_powers(in, lo);
}

double pii_objective(const PiiInstance& in, std::span<const double> powers) {
  if (powers.size() != in.size()) throw std::invalid_argument("power vector has wrong length");
  double total = 0.0;
  for (std::size_t m = 0; m < powers.size(); ++m) {
    total += std::log2(1.0 + powers[m] / in.effective_noise[m]);
  }
  return total;
}

PiiOutcome apply_pii(const ChannelState& ch, const ServingPlan& plan, const GnbTransmission& tx,
                     const RadioConfig& radio) {
  PiiOutcome out{plan, tx, {}, 0};
  std::vector<double> bh_sum(plan.powers.bh_power.size(), 0.0);
  int n_sub = 0;
  for (std::size_t s = 0; s < out.tx.subbands.size(); ++s) {
    GnbSubband& sb = out.tx.subbands[s];
    if (sb.n_links() == 0) continue;
    ++n_sub;
    const PiiInstance in = build_instance(static_cast<int>(s), ch, plan, tx, radio);
    std::vector<double> p;
    if (in.feasible()) {
      p = solve_waterfilling(in);
    } else {
      ++out.infeasible_subbands;
      p = in.floors;
    }
    sb.precoder.power_diag = enforce_budget(p, in.beam_cost, tx.budget_per_subband);
    const auto& q = sb.precoder.power_diag;
    for (std::size_t r = 0; r < sb.bh_uavs.size(); ++r) {
      bh_sum[idx(sb.bh_uavs[r] - 1)] += q[r] * in.beam_cost[r];
    }
    if (sb.tue >= 0) {
      const auto r = idx(sb.tue_row());
      out.plan.powers.ue_power[idx(sb.tue)] = q[r] * in.beam_cost[r];
    }
  }
  if (n_sub > 0) {
    for (std::size_t d = 0; d < bh_sum.size(); ++d) {
      if (plan.association.uav_active(static_cast<int>(d) + 1)) {
        out.plan.powers.bh_power[d] = bh_sum[d] / n_sub;
      }
    }
  }
  out.report = evaluate_instant(ch, out.plan, out.tx, radio);
  return out;
}

}  // namespace iabsim
