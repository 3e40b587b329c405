#include "iabsim/solver_pi.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "iabsim/rng.hpp"

namespace iabsim {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

std::string db_text(double linear) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << linear_to_db(linear) << " dB";
  return os.str();
}

}  // namespace

Position3D PlacementGrid::at(std::size_t i) const {
  const std::size_t nz = zs.size();
  const std::size_t ny = ys.size();
  return Position3D{xs[i / (ny * nz)], ys[(i / nz) % ny], zs[i % nz]};
}

std::vector<Position3D> PlacementGrid::points() const {
  std::vector<Position3D> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i));
  return out;
}

std::vector<double> axis_samples(const Interval& axis, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  if (axis.min > axis.max) throw std::invalid_argument("empty bounds interval");
  std::vector<double> out;
  const double span = axis.max - axis.min;
  // tolerate representation error so that e.g. [0, 1500] / 500 yields 4 samples
  const auto full_steps = static_cast<std::size_t>(std::floor(span / step + 1e-9));
  for (std::size_t k = 0; k <= full_steps; ++k) {
    out.push_back(std::min(axis.min + static_cast<double>(k) * step, axis.max));
  }
  if (axis.max - out.back() > 1e-9 * std::max(1.0, std::abs(axis.max))) out.push_back(axis.max);
  else out.back() = axis.max;
  return out;
}

PlacementGrid enumerate_grid(const AltitudeBounds& bounds, const GridResolution& r) {
  return PlacementGrid{axis_samples(bounds.x, r.dx), axis_samples(bounds.y, r.dy),
                       axis_samples(bounds.z, r.dz)};
}

CandidatePowers station_max_powers(const Scenario& s, std::span<const char> idle) {
  const auto n_u = idx(s.num_users());
  CandidatePowers c(idx(s.num_uavs() + 1), std::vector<double>(n_u, s.radio.uav_max_power));
  c[0].assign(n_u, s.radio.gnb_max_power);
  for (std::size_t d = 0; d < idle.size(); ++d) {
    if (idle[d]) c[d + 1].assign(n_u, 0.0);
  }
  return c;
}

Association associate(const LargeScaleGains& g, const CandidatePowers& candidate) {
  const auto n_u = g.gnb_to_ue.size();
  const auto n_d = g.uav_to_ue.size();
  if (candidate.size() != n_d + 1) throw std::invalid_argument("candidate powers: wrong station count");
  std::vector<int> serving(n_u, kGnbStation);
  for (std::size_t u = 0; u < n_u; ++u) {
    double best = candidate[0][u] * g.gnb_to_ue[u];
    for (std::size_t d = 0; d < n_d; ++d) {
      const double p = candidate[d + 1][u];
      if (p < 0.0) throw std::invalid_argument("candidate powers must be non-negative");
      const double rx = p * g.uav_to_ue[d][u];
      // strict: a later station must beat the incumbent to take the UE
      if (rx > best) {
        best = rx;
        serving[u] = static_cast<int>(d) + 1;
      }
    }
  }
  return Association(std::move(serving), static_cast<int>(n_d));
}

Association associate(const Scenario& s, std::span<const Position3D> uav_positions,
                      const CandidatePowers& candidate) {
  std::vector<char> active(uav_positions.size(), 1);
  for (std::size_t d = 0; d + 1 < candidate.size(); ++d) {
    const auto& row = candidate[d + 1];
    active[d] = std::any_of(row.begin(), row.end(), [](double p) { return p > 0.0; }) ? 1 : 0;
  }
  return associate(large_scale_gains(s, uav_positions, active), candidate);
}

PowerDecision allocate_powers(const Scenario& s, const Association& a, const LargeScaleGains& g,
                              std::span<const int> ue_levels, int n_levels) {
  if (n_levels < 1) throw std::invalid_argument("power levels must be at least 1");
  const int n_u = a.n_users();
  const int n_d = a.n_uavs();
  auto level_fraction = [&](int u) {
    if (ue_levels.empty()) return 1.0;
    return static_cast<double>(ue_levels[idx(u)]) / n_levels;
  };

  PowerDecision out;
  out.powers.ue_power.assign(idx(n_u), 0.0);
  out.powers.bh_power.assign(idx(n_d), 0.0);

  for (int d = 1; d <= n_d; ++d) {
    const auto& ues = a.users_of(d);
    for (int u : ues) {
      out.powers.ue_power[idx(u)] =
          level_fraction(u) * s.radio.uav_max_power / static_cast<double>(ues.size());
    }
  }

  // Backhaul: smallest power meeting the threshold given the UAV-tier interference.
  const double noise = s.radio.noise_power;
  double bh_total = 0.0;
  for (int d = 1; d <= n_d; ++d) {
    if (!a.uav_active(d)) continue;
    double interference = 0.0;
    for (int j = 1; j <= n_d; ++j) {
      if (j == d) continue;
      double total = 0.0;
      for (int i : a.users_of(j)) total += out.powers.ue_power[idx(i)];
      interference += total * g.uav_to_uav[idx(j - 1)][idx(d - 1)];
    }
    const double p = s.radio.sinr_threshold_bh * (interference + noise) / g.gnb_to_uav[idx(d - 1)];
    out.powers.bh_power[idx(d - 1)] = p;
    bh_total += p;
  }

  const auto& tues = a.users_of(kGnbStation);
  const double subband_budget =
      s.radio.gnb_max_power / static_cast<double>(std::max<std::size_t>(1, tues.size()));
  if (bh_total > subband_budget) {
    out.within_budget = false;
    for (double& p : out.powers.bh_power) p *= subband_budget / bh_total;
    bh_total = subband_budget;
  }
  const double remainder = std::max(0.0, subband_budget - bh_total);
  for (int u : tues) out.powers.ue_power[idx(u)] = level_fraction(u) * remainder;
  return out;
}

FeasibilityReport feasible(const Scenario& s, const ServingPlan& plan, const LargeScaleGains& g) {
  FeasibilityReport rep;
  auto fail = [&rep](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };
  const Association& a = plan.association;
  const RadioConfig& r = s.radio;
  const double ue_floor = r.sinr_threshold_ue * (1.0 - kThresholdSlack);
  const double bh_floor = r.sinr_threshold_bh * (1.0 - kThresholdSlack);

  for (int u = 0; u < a.n_users(); ++u) {
    if (a.served_by_uav(u)) {
      const double gamma = avg_sinr_aue(u, g, plan, r.noise_power);
      if (!(gamma >= ue_floor)) {
        fail("aue_sinr: aUE " + std::to_string(u + 1) + " average SINR " + db_text(gamma) +
             " below UE threshold");
      }
    } else {
      const double gamma = avg_sinr_tue(u, g, plan, r.noise_power);
      if (!(gamma >= ue_floor)) {
        fail("tue_sinr: tUE " + std::to_string(u + 1) + " average SINR " + db_text(gamma) +
             " below UE threshold");
      }
    }
  }
  for (int d : a.active_uavs()) {
    const double gamma = avg_sinr_bh(d, g, plan, r.noise_power);
    if (!(gamma >= bh_floor)) {
      fail("backhaul_sinr: backhaul of UAV " + std::to_string(d) + " average SINR " + db_text(gamma) +
           " below backhaul threshold");
    }
  }

  const auto& pw = plan.powers;
  for (int d = 1; d <= a.n_uavs(); ++d) {
    double total = 0.0;
    for (int u : a.users_of(d)) {
      const double p = pw.ue_power[idx(u)];
      total += p;
      if (p < 0.0 || p > r.uav_max_power) {
        fail("power_range: aUE " + std::to_string(u + 1) + " power outside [0, UAV max]");
      }
    }
    if (total > r.uav_max_power * (1.0 + 1e-12)) {
      fail("power_range: UAV " + std::to_string(d) + " total power exceeds its maximum");
    }
  }
  const auto& tues = a.users_of(kGnbStation);
  for (int u : tues) {
    const double p = pw.ue_power[idx(u)];
    if (p < 0.0 || p > r.gnb_max_power) {
      fail("power_range: tUE " + std::to_string(u + 1) + " power outside [0, gNB max]");
    }
  }
  double bh_total = 0.0;
  for (int d : a.active_uavs()) bh_total += pw.bh_power[idx(d - 1)];
  const double subband_budget =
      r.gnb_max_power / static_cast<double>(std::max<std::size_t>(1, tues.size()));
  const double worst_tue =
      tues.empty() ? 0.0
                   : std::accumulate(tues.begin(), tues.end(), 0.0, [&](double m, int u) {
                       return std::max(m, pw.ue_power[idx(u)]);
                     });
  if (bh_total + worst_tue > subband_budget * (1.0 + 1e-12)) {
    fail("gnb_budget: gNB subband transmit power exceeds its share of the budget");
  }
  return rep;
}

Solution evaluate_candidate(const Scenario& s, std::span<const Position3D> uav_positions,
                            std::span<const char> idle, std::span<const int> ue_levels,
                            int n_levels) {
  std::vector<char> active(uav_positions.size(), 1);
  for (std::size_t d = 0; d < idle.size(); ++d) active[d] = idle[d] ? 0 : 1;

  const LargeScaleGains g = large_scale_gains(s, uav_positions, active);
  Association a = associate(g, station_max_powers(s, idle));
  PowerDecision pd = allocate_powers(s, a, g, ue_levels, n_levels);

  Solution sol;
  sol.uav_positions.assign(uav_positions.begin(), uav_positions.end());
  sol.uav_idle.assign(uav_positions.size(), 0);
  for (std::size_t d = 0; d < idle.size(); ++d) sol.uav_idle[d] = idle[d];
  sol.power_levels.assign(ue_levels.begin(), ue_levels.end());

  const ServingPlan plan = make_plan(a, pd.powers);
  sol.average = evaluate_average(g, plan, s.radio);
  sol.avg_sum_rate = sol.average.sum_rate;
  FeasibilityReport rep = feasible(s, plan, g);
  if (!pd.within_budget) {
    rep.ok = false;
    rep.violations.insert(rep.violations.begin(),
                          "backhaul_sinr: minimal backhaul power exceeds the gNB budget");
  }
  sol.feasible = rep.ok;
  sol.violations = std::move(rep.violations);
  sol.association = std::move(a);
  sol.powers = std::move(pd.powers);
  sol.candidates_evaluated = 1;
  return sol;
}

namespace {

struct Candidate {
  std::vector<std::size_t> slots;  // grid index per UAV, grid.size() = idle
  std::vector<int> levels;
  Solution solution;
};

// Total order used for the argmax: feasible first, then objective, then the
// lexicographically smallest position tuple, then the smallest level vector.
bool better(const Candidate& a, const Candidate& b) {
  if (a.solution.feasible != b.solution.feasible) return a.solution.feasible;
  if (a.solution.avg_sum_rate != b.solution.avg_sum_rate) {
    return a.solution.avg_sum_rate > b.solution.avg_sum_rate;
  }
  if (a.slots != b.slots) return a.slots < b.slots;
  return a.levels < b.levels;
}

struct SearchSpace {
  std::size_t slot_options;   // per UAV
  std::size_t level_combos;   // L^U
  std::size_t total;
};

long double raw_count(const Scenario& s, const PlacementGrid& grid, const PiOptions& o) {
  const long double slots = static_cast<long double>(grid.size()) + (o.allow_idle_uavs ? 1 : 0);
  return std::pow(slots, static_cast<long double>(s.num_uavs())) *
         std::pow(static_cast<long double>(o.power_levels), static_cast<long double>(s.num_users()));
}

}  // namespace

long double candidate_count(const Scenario& s, const PlacementGrid& grid, const PiOptions& o) {
  return raw_count(s, grid, o);
}

Solution solve_pi(const Scenario& s, const PlacementGrid& grid, const PiOptions& o) {
  if (grid.size() == 0) throw std::invalid_argument("placement grid is empty");
  if (o.power_levels < 1) throw std::invalid_argument("power levels must be at least 1");
  const long double count = raw_count(s, grid, o);
  if (count > static_cast<long double>(o.candidate_budget)) {
    std::ostringstream os;
    os << "exhaustive search would evaluate " << std::setprecision(6) << static_cast<double>(count)
       << " candidates, above the budget of " << o.candidate_budget;
    throw CandidateBudgetError(os.str(), count);
  }

  const int n_d = s.num_uavs();
  const int n_u = s.num_users();
  SearchSpace space;
  space.slot_options = grid.size() + (o.allow_idle_uavs ? 1 : 0);
  space.level_combos = 1;
  if (o.power_levels > 1) {
    for (int u = 0; u < n_u; ++u) space.level_combos *= idx(o.power_levels);
  }
  space.total = static_cast<std::size_t>(count);

  std::vector<std::size_t> order(space.total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (o.shuffle_seed) {
    RngStream rng(derive_seed(*o.shuffle_seed, {tag(StreamTag::kShuffle)}));
    std::shuffle(order.begin(), order.end(), rng);
  }

  auto decode = [&](std::size_t c, Candidate& cand) {
    std::size_t level_part = c % space.level_combos;
    std::size_t slot_part = c / space.level_combos;
    cand.slots.assign(idx(n_d), 0);
    for (int d = n_d - 1; d >= 0; --d) {
      cand.slots[idx(d)] = slot_part % space.slot_options;
      slot_part /= space.slot_options;
    }
    cand.levels.clear();
    if (o.power_levels > 1) {
      cand.levels.assign(idx(n_u), 1);
      for (int u = n_u - 1; u >= 0; --u) {
        cand.levels[idx(u)] = static_cast<int>(level_part % idx(o.power_levels)) + 1;
        level_part /= idx(o.power_levels);
      }
    }
  };

  auto search = [&](std::size_t begin, std::size_t end, std::optional<Candidate>& best,
                    std::size_t& evaluated) {
    Candidate cand;
    std::vector<Position3D> pos(idx(n_d));
    std::vector<char> idle(idx(n_d), 0);
    for (std::size_t k = begin; k < end; ++k) {
      decode(order[k], cand);
      bool coincident = false;
      for (int d = 0; d < n_d; ++d) {
        const std::size_t slot = cand.slots[idx(d)];
        idle[idx(d)] = slot == grid.size() ? 1 : 0;
        pos[idx(d)] = idle[idx(d)] ? s.uavs[idx(d)].position : grid.at(slot);
        for (int j = 0; j < d; ++j) {
          if (!idle[idx(d)] && !idle[idx(j)] && pos[idx(j)] == pos[idx(d)]) coincident = true;
        }
      }
      if (coincident) continue;
      cand.solution = evaluate_candidate(s, pos, idle, cand.levels, o.power_levels);
      ++evaluated;
      if (!best || better(cand, *best)) best = cand;
    }
  };

  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(o.threads, static_cast<unsigned>(space.total)));
  std::vector<std::optional<Candidate>> bests(n_threads);
  std::vector<std::size_t> counts(n_threads, 0);
  if (n_threads == 1) {
    search(0, space.total, bests[0], counts[0]);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (space.total + n_threads - 1) / n_threads;
    for (unsigned t = 0; t < n_threads; ++t) {
      const std::size_t b = std::min(space.total, t * chunk);
      const std::size_t e = std::min(space.total, b + chunk);
      pool.emplace_back([&, t, b, e] { search(b, e, bests[t], counts[t]); });
    }
    for (auto& th : pool) th.join();
  }

  std::optional<Candidate> best;
  std::size_t evaluated = 0;
  for (unsigned t = 0; t < n_threads; ++t) {
    evaluated += counts[t];
    if (bests[t] && (!best || better(*bests[t], *best))) best = std::move(bests[t]);
  }
  if (!best) throw std::runtime_error("no admissible candidate (all UAV tuples coincide)");
  best->solution.candidates_evaluated = evaluated;
  return std::move(best->solution);
}

}  // namespace iabsim
