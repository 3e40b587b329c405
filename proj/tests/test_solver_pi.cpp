#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "iabsim/solver_pi.hpp"
#include "oracles.hpp"

using namespace iabsim;

namespace {

Scenario with_users(const std::vector<Position3D>& ues, int n_uavs) {
  NetworkLayout layout;
  layout.n_uavs = n_uavs;
  Scenario s = generate_scenario_a({1, 1, 10.0}, {}, 1, layout);
  s.users.clear();
  for (std::size_t i = 0; i < ues.size(); ++i) s.users.push_back({static_cast<int>(i) + 1, ues[i]});
  return s;
}

// Closed-form rule for a single UAV, written out from the model without the
// library's association, scheduling or SINR code.
struct OracleEval {
  bool feasible = false;
  double objective = 0.0;
};

OracleEval oracle_single_uav(const Scenario& s, const Position3D& q) {
  const RadioConfig& r = s.radio;
  const double f = r.carrier_freq;
  const Position3D g = s.gnb.position;
  const std::size_t n = s.users.size();
  std::vector<double> g_gu(n);
  std::vector<double> g_au(n);
  std::vector<int> aues;
  std::vector<int> tues;
  for (std::size_t u = 0; u < n; ++u) {
    const Position3D p = s.users[u].position;
    const double d = std::sqrt((p.x - g.x) * (p.x - g.x) + (p.y - g.y) * (p.y - g.y) +
                               (p.z - g.z) * (p.z - g.z));
    g_gu[u] = oracle::from_db(-oracle::uma_db(d, f, p.z));
    g_au[u] = oracle::from_db(-oracle::atg_db(q.x - p.x, q.y - p.y, q.z - p.z, f));
    if (r.uav_max_power * g_au[u] > r.gnb_max_power * g_gu[u]) aues.push_back(static_cast<int>(u));
    else tues.push_back(static_cast<int>(u));
  }
  const double g_ga = oracle::from_db(-oracle::atg_db(q.x - g.x, q.y - g.y, q.z - g.z, f));
  const double noise = r.noise_power;
  const double bh = aues.empty() ? 0.0 : r.sinr_threshold_bh * noise / g_ga;
  const double budget = r.gnb_max_power / static_cast<double>(std::max<std::size_t>(1, tues.size()));
  OracleEval out;
  if (bh > budget) return out;
  const double p_t = budget - bh;
  const double p_a = aues.empty() ? 0.0 : r.uav_max_power / static_cast<double>(aues.size());

  bool ok = true;
  const double floor = r.sinr_threshold_ue * (1.0 - 1e-9);
  for (std::size_t i = 0; i < aues.size(); ++i) {
    const auto u = static_cast<std::size_t>(aues[i]);
    const double gnb_tx = bh + (tues.empty() ? 0.0 : p_t);
    const double gamma = p_a * g_au[u] / (g_gu[u] * gnb_tx + noise);
    if (gamma < floor) ok = false;
    out.objective += r.bandwidth / static_cast<double>(aues.size()) * std::log2(1.0 + gamma);
  }
  for (std::size_t j = 0; j < tues.size(); ++j) {
    const auto u = static_cast<std::size_t>(tues[j]);
    const double intf = aues.empty() ? 0.0 : p_a * g_au[u];
    const double gamma = p_t * g_gu[u] / (intf + noise);
    if (gamma < floor) ok = false;
    out.objective += r.bandwidth / static_cast<double>(tues.size()) * std::log2(1.0 + gamma);
  }
  out.feasible = ok;
  return out;
}

struct OracleBest {
  Position3D position;
  OracleEval eval;
};

OracleBest oracle_search(const Scenario& s, const PlacementGrid& grid) {
  OracleBest best;
  bool have = false;
  for (double x : grid.xs) {
    for (double y : grid.ys) {
      for (double z : grid.zs) {
        const Position3D q{x, y, z};
        const OracleEval e = oracle_single_uav(s, q);
        const bool take = !have || (e.feasible && !best.eval.feasible) ||
                          (e.feasible == best.eval.feasible && e.objective > best.eval.objective);
        if (take) {
          best = {q, e};
          have = true;
        }
      }
    }
  }
  return best;
}

}  // namespace

TEST_SUITE("solver_pi") {

TEST_CASE("axis samples include both ends") {
  CHECK(axis_samples({0.0, 1500.0}, 500.0) == std::vector<double>{0, 500, 1000, 1500});
  CHECK(axis_samples({0.0, 250.0}, 100.0) == std::vector<double>{0, 100, 200, 250});
  CHECK(axis_samples({50.0, 1450.0}, 100.0).size() == 15);
  CHECK(axis_samples({7.0, 7.0}, 100.0) == std::vector<double>{7.0});
  CHECK(axis_samples({0.0, 0.3}, 0.1).size() == 4);
  CHECK_THROWS_AS(axis_samples({0.0, 1.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(axis_samples({2.0, 1.0}, 1.0), std::invalid_argument);
}

TEST_CASE("grid enumeration is x-major and complete") {
  AltitudeBounds b{{0.0, 1500.0}, {0.0, 1500.0}, {200.0, 500.0}};
  const PlacementGrid g = enumerate_grid(b, {500.0, 500.0, 300.0});
  REQUIRE(g.size() == 32);
  CHECK(g.at(0) == Position3D{0, 0, 200});
  CHECK(g.at(1) == Position3D{0, 0, 500});
  CHECK(g.at(2) == Position3D{0, 500, 200});
  CHECK(g.at(31) == Position3D{1500, 1500, 500});
  const auto pts = g.points();
  CHECK(std::is_sorted(pts.begin(), pts.end()));
  CHECK(std::adjacent_find(pts.begin(), pts.end()) == pts.end());

  const PlacementGrid full = enumerate_grid(AltitudeBounds{{50, 1450}, {50, 1450}, {100, 500}}, {});
  CHECK(full.size() == 15 * 15 * 5);
}

TEST_CASE("association picks the strongest average received power, ties to the lowest id") {
  LargeScaleGains g;
  g.gnb_to_ue = {1e-12, 1e-12, 1e-12};
  g.uav_to_ue = {{1e-11, 1e-14, 0.0}, {1e-11, 1e-13, 0.0}};
  g.gnb_to_uav = {1e-9, 1e-9};
  g.uav_to_uav = {{0.0, 0.0}, {0.0, 0.0}};
  CandidatePowers c{{10.0, 10.0, 10.0}, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}};
  // UE 1: gNB 1e-11, UAV1 1e-11, UAV2 1e-11 -> gNB wins the three-way tie
  Association a = associate(g, c);
  CHECK(a.server(0) == 0);
  CHECK(a.server(1) == 0);
  CHECK(a.server(2) == 0);

  c[0][0] = 1.0;  // now both UAVs beat the gNB and tie with each other
  a = associate(g, c);
  CHECK(a.server(0) == 1);

  g.uav_to_ue[1][1] = 1e-10;  // UAV2 alone beats the gNB for UE 2
  a = associate(g, c);
  CHECK(a.server(1) == 2);

  c[1][0] = -1.0;
  CHECK_THROWS_AS(associate(g, c), std::invalid_argument);
}

TEST_CASE("idle UAVs offer zero power and never take UEs") {
  const Scenario s = with_users({{400, 400, 1.5}}, 1);
  const std::vector<char> idle{1};
  const CandidatePowers c = station_max_powers(s, idle);
  CHECK(c[1][0] == 0.0);
  CHECK(c[0][0] == s.radio.gnb_max_power);
  const std::vector<Position3D> pos{{400, 400, 100}};
  CHECK(associate(s, pos, c).server(0) == 0);
  CHECK(associate(s, pos, station_max_powers(s)).server(0) == 1);
}

TEST_CASE("closed-form powers: equal UAV split, minimal backhaul, remainder to the tUE") {
  const Scenario s = with_users({{400, 400, 1.5}, {410, 400, 1.5}, {1400, 1400, 1.5}}, 1);
  LargeScaleGains g;
  g.gnb_to_ue = {1e-12, 1e-12, 1e-12};
  g.uav_to_ue = {{1e-9, 1e-9, 1e-15}};
  g.gnb_to_uav = {2e-9};
  g.uav_to_uav = {{0.0}};
  const Association a({1, 1, 0}, 1);
  const PowerDecision pd = allocate_powers(s, a, g);
  CHECK(pd.within_budget);
  CHECK(pd.powers.ue_power[0] == doctest::Approx(1.9905359).epsilon(1e-7));
  CHECK(pd.powers.ue_power[1] == pd.powers.ue_power[0]);
  const double bh = s.radio.sinr_threshold_bh * s.radio.noise_power / 2e-9;
  CHECK(pd.powers.bh_power[0] == doctest::Approx(bh).epsilon(1e-12));
  CHECK(pd.powers.ue_power[2] == doctest::Approx(s.radio.gnb_max_power - bh).epsilon(1e-12));
  // the backhaul threshold is met with equality
  const ServingPlan plan = make_plan(a, pd.powers);
  CHECK(avg_sinr_bh(1, g, plan, s.radio.noise_power) ==
        doctest::Approx(s.radio.sinr_threshold_bh).epsilon(1e-12));

  const std::vector<int> levels{1, 2, 1};
  const PowerDecision half = allocate_powers(s, a, g, levels, 2);
  CHECK(half.powers.ue_power[0] == doctest::Approx(pd.powers.ue_power[0] / 2));
  CHECK(half.powers.ue_power[1] == doctest::Approx(pd.powers.ue_power[1]));
  CHECK(half.powers.ue_power[2] == doctest::Approx(pd.powers.ue_power[2] / 2));
}

TEST_CASE("closed-form powers: a UAV with no UEs gets no backhaul power") {
  const Scenario s = with_users({{400, 400, 1.5}, {1400, 1400, 1.5}}, 1);
  LargeScaleGains g;
  g.gnb_to_ue = {1e-12, 1e-12};
  g.uav_to_ue = {{1e-15, 1e-15}};
  g.gnb_to_uav = {2e-9};
  g.uav_to_uav = {{0.0}};
  const PowerDecision pd = allocate_powers(s, Association({0, 0}, 1), g);
  CHECK(pd.powers.bh_power[0] == 0.0);
  CHECK(pd.powers.ue_power[0] == doctest::Approx(s.radio.gnb_max_power / 2));
  CHECK(pd.powers.ue_power[1] == doctest::Approx(s.radio.gnb_max_power / 2));
}

TEST_CASE("closed-form powers: backhaul above the budget is flagged and scaled") {
  const Scenario s = with_users({{400, 400, 1.5}}, 1);
  LargeScaleGains g;
  g.gnb_to_ue = {1e-12};
  g.uav_to_ue = {{1e-9}};
  g.gnb_to_uav = {1e-20};
  g.uav_to_uav = {{0.0}};
  const PowerDecision pd = allocate_powers(s, Association({1}, 1), g);
  CHECK_FALSE(pd.within_budget);
  CHECK(pd.powers.bh_power[0] == doctest::Approx(s.radio.gnb_max_power));
}

TEST_CASE("feasibility at, above and below the UE threshold") {
  const Scenario s = with_users({{400, 400, 1.5}}, 1);
  const double noise = s.radio.noise_power;
  const double gamma = s.radio.sinr_threshold_ue;
  LargeScaleGains g;
  g.gnb_to_ue = {0.0};
  g.gnb_to_uav = {1.0};
  g.uav_to_uav = {{0.0}};
  const double bh = s.radio.sinr_threshold_bh * noise;  // exactly on the backhaul threshold
  auto plan_with = [&](double snr) {
    g.uav_to_ue = {{snr * noise / 1.0}};
    return make_plan(Association({1}, 1), {{1.0}, {bh}});
  };
  ServingPlan p = plan_with(2.0 * gamma);
  CHECK(feasible(s, p, g).ok);

  p = plan_with(0.5 * gamma);
  const FeasibilityReport bad = feasible(s, p, g);
  CHECK_FALSE(bad.ok);
  REQUIRE(bad.violations.size() == 1);
  CHECK(bad.violations[0].rfind("aue_sinr", 0) == 0);
  CHECK(bad.violations[0].find("aUE 1") != std::string::npos);

  p = plan_with(gamma);
  CHECK(feasible(s, p, g).ok);

  // backhaul just under its threshold
  p = make_plan(Association({1}, 1), {{1.0}, {bh * 0.99}});
  g.uav_to_ue = {{2.0 * gamma * noise}};
  const FeasibilityReport bhr = feasible(s, p, g);
  REQUIRE_FALSE(bhr.ok);
  CHECK(bhr.violations[0].rfind("backhaul_sinr", 0) == 0);

  // UAV above its maximum power
  p = make_plan(Association({1}, 1), {{s.radio.uav_max_power * 1.01}, {bh}});
  CHECK_FALSE(feasible(s, p, g).ok);
}

TEST_CASE("feasibility: gNB subband budget") {
  const Scenario s = with_users({{400, 400, 1.5}}, 0);
  LargeScaleGains g;
  g.gnb_to_ue = {1e-9};
  ServingPlan p = make_plan(Association({0}, 0), {{s.radio.gnb_max_power}, {}});
  CHECK(feasible(s, p, g).ok);
  p.powers.ue_power[0] *= 1.001;
  const auto rep = feasible(s, p, g);
  CHECK_FALSE(rep.ok);
  bool named = false;
  for (const auto& v : rep.violations) named = named || v.rfind("gnb_budget", 0) == 0;
  CHECK(named);
}

TEST_CASE("no UAVs: every UE on the gNB with an equal budget share") {
  const Scenario s = with_users({{400, 400, 1.5}, {900, 700, 1.5}, {1200, 300, 1.5}}, 0);
  const PlacementGrid grid = enumerate_grid(s.bounds, {500.0, 500.0, 200.0});
  const Solution sol = solve_pi(s, grid);
  CHECK(sol.uav_positions.empty());
  CHECK(sol.candidates_evaluated == 1);
  for (int u = 0; u < 3; ++u) {
    CHECK(sol.association.server(u) == 0);
    CHECK(sol.powers.ue_power[static_cast<std::size_t>(u)] ==
          doctest::Approx(s.radio.gnb_max_power / 3));
  }
  CHECK(sol.feasible);
}

TEST_CASE("co-located hotspot: UAV goes to the grid point closest above the UEs") {
  const Scenario s = with_users({{1200, 1200, 1.5}, {1200, 1200, 1.5}}, 1);
  const PlacementGrid grid{{0, 500, 1000, 1500}, {0, 500, 1000, 1500}, {200, 500}};
  const Solution sol = solve_pi(s, grid);
  REQUIRE(sol.uav_positions.size() == 1);
  CHECK(sol.uav_positions[0] == Position3D{1000, 1000, 200});
  CHECK(sol.feasible);
  CHECK(sol.candidates_evaluated == 32);

  const OracleBest o = oracle_search(s, grid);
  CHECK(o.position == sol.uav_positions[0]);
  CHECK(sol.avg_sum_rate == doctest::Approx(o.eval.objective).epsilon(1e-9));
}

TEST_CASE("property: single-UAV search agrees with the oracle search") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, seed);
    const PlacementGrid grid = enumerate_grid(s.bounds, {300.0, 300.0, 200.0});
    const Solution sol = solve_pi(s, grid);
    const OracleBest o = oracle_search(s, grid);
    REQUIRE(sol.feasible == o.eval.feasible);
    REQUIRE(sol.avg_sum_rate == doctest::Approx(o.eval.objective).epsilon(1e-9));
    // the reported objective is the oracle objective of the reported position
    const OracleEval at = oracle_single_uav(s, sol.uav_positions[0]);
    REQUIRE(sol.avg_sum_rate == doctest::Approx(at.objective).epsilon(1e-9));
  }
}

TEST_CASE("evaluated candidates carry their own report") {
  const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, 4);
  const std::vector<Position3D> pos{{750, 750, 300}};
  const Solution c = evaluate_candidate(s, pos);
  CHECK(c.candidates_evaluated == 1);
  CHECK(c.feasible == c.violations.empty());
  CHECK(c.avg_sum_rate == c.average.sum_rate);
  CHECK(c.avg_sum_rate == doctest::Approx(oracle_single_uav(s, pos[0]).objective).epsilon(1e-9));
}

TEST_CASE("a finer grid never does worse than a coarser one it contains") {
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, seed);
    const Solution coarse = solve_pi(s, enumerate_grid(s.bounds, {400.0, 400.0, 400.0}));
    const Solution fine = solve_pi(s, enumerate_grid(s.bounds, {200.0, 200.0, 200.0}));
    if (coarse.feasible) {
      REQUIRE(fine.feasible);
      REQUIRE(fine.avg_sum_rate >= coarse.avg_sum_rate);
    }
  }
}

TEST_CASE("the optimum is the best of every individually evaluated tuple") {
  NetworkLayout layout;
  layout.n_uavs = 2;
  const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, 9, layout);
  const PlacementGrid grid = enumerate_grid(s.bounds, {700.0, 700.0, 400.0});
  const Solution sol = solve_pi(s, grid);

  // independent re-enumeration in reverse order
  bool have = false;
  Solution best;
  std::size_t evaluated = 0;
  for (std::size_t i = grid.size(); i-- > 0;) {
    for (std::size_t j = grid.size(); j-- > 0;) {
      if (i == j) continue;
      const std::vector<Position3D> pos{grid.at(i), grid.at(j)};
      Solution c = evaluate_candidate(s, pos);
      ++evaluated;
      const bool better = !have || (c.feasible && !best.feasible) ||
                          (c.feasible == best.feasible &&
                           (c.avg_sum_rate > best.avg_sum_rate ||
                            (c.avg_sum_rate == best.avg_sum_rate && pos < best.uav_positions)));
      if (better) {
        best = std::move(c);
        have = true;
      }
    }
  }
  CHECK(sol.candidates_evaluated == evaluated);
  best.candidates_evaluated = evaluated;
  CHECK(sol == best);
}

TEST_CASE("shuffled order and thread count do not change the result") {
  NetworkLayout layout;
  layout.n_uavs = 2;
  const Scenario s = generate_scenario_b({6, 2, 100.0}, {}, 3, layout);
  const PlacementGrid grid = enumerate_grid(s.bounds, {400.0, 400.0, 200.0});
  const Solution ref = solve_pi(s, grid);
  for (std::uint64_t shuffle : {1ULL, 2ULL, 99ULL}) {
    PiOptions o;
    o.shuffle_seed = shuffle;
    CHECK(solve_pi(s, grid, o) == ref);
    o.threads = 3;
    CHECK(solve_pi(s, grid, o) == ref);
  }
}

TEST_CASE("coincident UAV tuples are skipped") {
  NetworkLayout layout;
  layout.n_uavs = 2;
  const Scenario s = generate_scenario_a({1, 2, 50.0}, {}, 2, layout);
  const PlacementGrid grid{{400.0, 900.0}, {400.0}, {200.0}};
  const Solution sol = solve_pi(s, grid);
  CHECK(sol.candidates_evaluated == 2);
  CHECK_FALSE(sol.uav_positions[0] == sol.uav_positions[1]);
  CHECK_THROWS_AS(solve_pi(s, PlacementGrid{{400.0}, {400.0}, {200.0}}), std::runtime_error);
}

TEST_CASE("search space above the candidate budget is refused with its size") {
  NetworkLayout layout;
  layout.n_uavs = 3;
  const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, 1, layout);
  const PlacementGrid grid = enumerate_grid(s.bounds, {});
  CHECK(candidate_count(s, grid, {}) == doctest::Approx(std::pow(1125.0, 3)));
  try {
    solve_pi(s, grid);
    FAIL("expected CandidateBudgetError");
  } catch (const CandidateBudgetError& e) {
    CHECK(static_cast<double>(e.count()) == doctest::Approx(std::pow(1125.0, 3)));
  }
  PiOptions o;
  o.power_levels = 3;
  o.allow_idle_uavs = true;
  CHECK(candidate_count(s, grid, o) == doctest::Approx(std::pow(1126.0, 3) * std::pow(3.0, 4)));
}

TEST_CASE("allowing idle UAVs never lowers the optimum") {
  NetworkLayout layout;
  layout.n_uavs = 2;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, seed, layout);
    const PlacementGrid grid = enumerate_grid(s.bounds, {500.0, 500.0, 400.0});
    const Solution plain = solve_pi(s, grid);
    PiOptions o;
    o.allow_idle_uavs = true;
    const Solution idle = solve_pi(s, grid, o);
    CHECK(idle.candidates_evaluated > plain.candidates_evaluated);
    if (plain.feasible) {
      REQUIRE(idle.feasible);
      CHECK(idle.avg_sum_rate >= plain.avg_sum_rate);
    }
    for (std::size_t d = 0; d < idle.uav_idle.size(); ++d) {
      if (idle.uav_idle[d]) CHECK_FALSE(idle.association.uav_active(static_cast<int>(d) + 1));
    }
  }
}

TEST_CASE("two power levels contain the closed-form point") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, seed);
    const PlacementGrid grid = enumerate_grid(s.bounds, {500.0, 500.0, 400.0});
    const Solution one = solve_pi(s, grid);
    PiOptions o;
    o.power_levels = 2;
    const Solution two = solve_pi(s, grid, o);
    CHECK(two.power_levels.size() == 4);
    if (one.feasible) {
      REQUIRE(two.feasible);
      CHECK(two.avg_sum_rate >= one.avg_sum_rate * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("property: feasible optima serve each UE once within every power limit") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 10; ++i) {
    NetworkLayout layout;
    layout.n_uavs = 1 + i % 2;
    const Scenario s = generate_scenario_b({4, 2, 150.0}, {}, rng(), layout);
    const Solution sol = solve_pi(s, enumerate_grid(s.bounds, {500.0, 500.0, 400.0}));
    if (!sol.feasible) continue;
    int members = 0;
    for (int st = 0; st <= s.num_uavs(); ++st) members += static_cast<int>(sol.association.users_of(st).size());
    REQUIRE(members == s.num_users());
    for (int d = 1; d <= s.num_uavs(); ++d) {
      double total = 0.0;
      for (int u : sol.association.users_of(d)) total += sol.powers.ue_power[static_cast<std::size_t>(u)];
      REQUIRE(total <= s.radio.uav_max_power * (1.0 + 1e-12));
    }
    const double ue_floor = s.radio.sinr_threshold_ue * (1.0 - 1e-9);
    for (double g : sol.average.sinr) REQUIRE(g >= ue_floor);
    for (int d : sol.association.active_uavs()) {
      REQUIRE(sol.average.sinr_bh[static_cast<std::size_t>(d - 1)] >=
              s.radio.sinr_threshold_bh * (1.0 - 1e-9));
    }
  }
}

}  // TEST_SUITE
