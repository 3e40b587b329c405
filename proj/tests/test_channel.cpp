#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "iabsim/channel.hpp"
#include "oracles.hpp"

using namespace iabsim;

namespace {

NetworkLayout two_uavs() {
  NetworkLayout l;
  l.n_uavs = 2;
  return l;
}

}  // namespace

namespace {

struct Moments {
  double power = 0.0;
  double mean_re = 0.0;
  double mean_im = 0.0;
};

template <typename Draw>
Moments moments(int n_draws, Draw draw) {
  Moments m;
  int count = 0;
  for (int i = 0; i < n_draws; ++i) {
    const ComplexRow h = draw();
    for (Eigen::Index k = 0; k < h.size(); ++k) {
      m.power += std::norm(h(k));
      m.mean_re += h(k).real();
      m.mean_im += h(k).imag();
      ++count;
    }
  }
  m.power /= count;
  m.mean_re /= count;
  m.mean_im /= count;
  return m;
}

Scenario one_uav_one_ue(Position3D uav, Position3D ue) {
  Scenario s;
  s.uavs.push_back(UavNode{1, uav, 2});
  s.users.push_back(UserNode{1, ue});
  s.bounds = AltitudeBounds{{0.0, 1500.0}, {0.0, 1500.0}, {0.0, 1000.0}};
  return s;
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("LOS probability anchors") {
  CHECK(std::abs(los_probability(90.0) - 0.99997) <= 1e-4);
  CHECK(los_probability(9.61) == doctest::Approx(1.0 / 10.61).epsilon(1e-12));
  CHECK(std::abs(los_probability(9.61) - 0.094251) <= 1e-6);
  CHECK(std::abs(los_probability(0.0) - 0.0219) <= 1e-3);
  CHECK(los_probability(37.0) == doctest::Approx(oracle::p_los(37.0)).epsilon(1e-14));
}

TEST_CASE("LOS probability rejects angles outside [0, 90]") {
  CHECK_THROWS_AS(los_probability(-0.1), std::out_of_range);
  CHECK_THROWS_AS(los_probability(90.1), std::out_of_range);
  CHECK_THROWS_AS(los_probability(std::nan("")), std::out_of_range);
}

TEST_CASE("property: LOS probability is non-decreasing in elevation") {
  double prev = los_probability(0.0);
  for (double t = 0.05; t <= 90.0; t += 0.05) {
    const double p = los_probability(t);
    REQUIRE(p >= prev);
    REQUIRE(p >= 0.0);
    REQUIRE(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("free-space anchors") {
  CHECK(std::abs(free_space_pathloss_db(1000.0, 2e9) - 98.47) <= 0.01);
  CHECK(std::abs(free_space_pathloss_db(100.0, 2e9) - 78.47) <= 0.01);
  CHECK(free_space_pathloss_db(1234.5, 2e9) == doctest::Approx(oracle::fspl_db(1234.5, 2e9)));
  CHECK_THROWS_AS(free_space_pathloss_db(0.0, 2e9), std::invalid_argument);
  CHECK_THROWS_AS(free_space_pathloss_db(-5.0, 2e9), std::invalid_argument);
}

TEST_CASE("air-to-ground loss tends to FSPL plus the LOS excess overhead") {
  const double d = 350.0;
  const double total = atg_pathloss_db(d, 90.0, 2e9);
  CHECK(std::abs(total - (free_space_pathloss_db(d, 2e9) + 1.0)) <= 1e-3);
  CHECK(atg_pathloss_db(d, 30.0, 2e9) ==
        doctest::Approx(oracle::atg_db(d * std::cos(oracle::kPi / 6), 0.0, d * 0.5, 2e9)).epsilon(1e-12));
  CHECK_THROWS_AS(atg_pathloss_db(0.0, 30.0, 2e9), std::invalid_argument);
}

TEST_CASE("property: ATG loss increases with distance and falls with elevation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(1.0, 5000.0);
  std::uniform_real_distribution<double> ang(0.0, 90.0);
  for (int i = 0; i < 2000; ++i) {
    const double d = dist(rng);
    const double t = ang(rng);
    REQUIRE(atg_pathloss_db(d * 1.01, t, 2e9) > atg_pathloss_db(d, t, 2e9));
    REQUIRE(atg_pathloss_db(d, std::min(90.0, t + 1.0), 2e9) <= atg_pathloss_db(d, t, 2e9));
  }
}

TEST_CASE("terrestrial anchors") {
  CHECK(std::abs(terrestrial_pathloss_db(500.0, 1.5, 2e9) - 125.03) <= 0.01);
  CHECK(std::abs(terrestrial_pathloss_db(5000.0, 1.5, 2e9) - 164.11) <= 0.01);
  CHECK(terrestrial_pathloss_db(500.0, 1.5, 2e9) ==
        13.54 + 39.08 * std::log10(500.0) + 20.0 * std::log10(2.0));
  CHECK(terrestrial_pathloss_db(800.0, 11.5, 2e9) ==
        doctest::Approx(oracle::uma_db(800.0, 2e9, 11.5)).epsilon(1e-14));
  CHECK_THROWS_AS(terrestrial_pathloss_db(0.0, 1.5, 2e9), std::invalid_argument);
}

TEST_CASE("average gain") {
  CHECK(average_gain(0.0) == 1.0);
  CHECK(average_gain(100.0) == doctest::Approx(1e-10).epsilon(1e-12));
  CHECK(average_gain(98.47) == doctest::Approx(1.42e-10).epsilon(0.01));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> g(1e-16, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = g(rng);
    REQUIRE(average_gain(-10.0 * std::log10(x)) == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("Rician fading: K = infinity gives unit-modulus entries") {
  RngStream rng(3);
  const ComplexRow h = draw_rician_miso(16, std::numeric_limits<double>::infinity(), rng);
  for (Eigen::Index k = 0; k < h.size(); ++k) CHECK(std::abs(h(k)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Rician fading: K = 0 is zero-mean Rayleigh") {
  RngStream rng(4);
  const Moments m = moments(25000, [&] { return draw_rician_miso(4, 0.0, rng); });
  CHECK(std::abs(m.power - 1.0) <= 0.02);
  CHECK(std::abs(m.mean_re) <= 0.02);
  CHECK(std::abs(m.mean_im) <= 0.02);
}

TEST_CASE("Rician fading: K = 10 dB has unit mean power") {
  RngStream rng(5);
  const Moments m = moments(100000, [&] { return draw_rician_miso(1, 10.0, rng); });
  CHECK(std::abs(m.power - 1.0) <= 0.02);
}

TEST_CASE("Rayleigh fading: unit power, zero mean") {
  RngStream rng(6);
  const Moments m = moments(100000, [&] { return draw_rayleigh_miso(1, rng); });
  CHECK(std::abs(m.power - 1.0) <= 0.02);
  CHECK(std::abs(m.mean_re) <= 0.02);
  CHECK(std::abs(m.mean_im) <= 0.02);
}

TEST_CASE("Rayleigh fading: distinct streams are uncorrelated") {
  RngStream a(derive_seed(1, {1}));
  RngStream b(derive_seed(1, {2}));
  std::complex<double> corr = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    corr += draw_rayleigh_miso(1, a)(0) * std::conj(draw_rayleigh_miso(1, b)(0));
  }
  CHECK(std::abs(corr / static_cast<double>(n)) <= 0.02);
}

TEST_CASE("fading generators reject bad arguments") {
  RngStream rng(1);
  CHECK_THROWS_AS(draw_rician_miso(0, 10.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(draw_rician_miso(2, -1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(draw_rayleigh_miso(0, rng), std::invalid_argument);
}

TEST_CASE("elevation of a UAV straight above a UE is 90 degrees") {
  CHECK(elevation_angle_deg({300.0, 400.0, 250.0}, {300.0, 400.0, 1.5}) == 90.0);
  CHECK(elevation_angle_deg({0.0, 0.0, 100.0}, {100.0, 0.0, 0.0}) == doctest::Approx(45.0));
}

TEST_CASE("large-scale gains follow the closed forms") {
  const Scenario s = one_uav_one_ue({400.0, 300.0, 200.0}, {100.0, 700.0, 1.5});
  const std::vector<Position3D> pos{s.uavs[0].position};
  const LargeScaleGains g = large_scale_gains(s, pos);
  const double d_gu = std::sqrt(650.0 * 650.0 + 50.0 * 50.0 + 23.5 * 23.5);
  CHECK(g.gnb_to_ue[0] == doctest::Approx(oracle::from_db(-oracle::uma_db(d_gu, 2e9, 1.5))).epsilon(1e-12));
  CHECK(g.uav_to_ue[0][0] ==
        doctest::Approx(oracle::from_db(-oracle::atg_db(300.0, -400.0, 198.5, 2e9))).epsilon(1e-12));
  CHECK(g.gnb_to_uav[0] ==
        doctest::Approx(oracle::from_db(-oracle::atg_db(350.0, 450.0, 175.0, 2e9))).epsilon(1e-12));
  CHECK(g.uav_to_uav[0][0] == 0.0);
}

TEST_CASE("backhaul gain is the access formula at the same geometry") {
  Scenario s = one_uav_one_ue({400.0, 300.0, 200.0}, {0.0, 0.0, 0.0});
  s.users[0].position = s.gnb.position;  // a UE where the gNB is
  s.users[0].position.x += 1e-3;
  const std::vector<Position3D> pos{s.uavs[0].position};
  const LargeScaleGains g = large_scale_gains(s, pos);
  CHECK(g.gnb_to_uav[0] == atg_gain(s.gnb.position, s.uavs[0].position, 2e9, s.propagation));
  CHECK(atg_gain(s.gnb.position, s.uavs[0].position, 2e9, s.propagation) ==
        atg_gain(s.uavs[0].position, s.gnb.position, 2e9, s.propagation));
  CHECK(g.uav_to_ue[0][0] == doctest::Approx(g.gnb_to_uav[0]).epsilon(1e-6));
}

TEST_CASE("moving a UAV away lowers its gain to a UE") {
  const Scenario s = one_uav_one_ue({500.0, 500.0, 200.0}, {500.0, 500.0, 1.5});
  double prev = 1.0;
  for (double dx = 0.0; dx <= 1000.0; dx += 50.0) {
    const std::vector<Position3D> pos{{500.0 + dx, 500.0, 200.0}};
    const double g = large_scale_gains(s, pos).uav_to_ue[0][0];
    CHECK(g < prev);
    CHECK(g > 0.0);
    CHECK(g <= 1.0);
    prev = g;
  }
}

TEST_CASE("coincident nodes raise a geometry error") {
  const Scenario s = one_uav_one_ue({500.0, 500.0, 200.0}, {500.0, 500.0, 200.0});
  const std::vector<Position3D> pos{s.uavs[0].position};
  CHECK_THROWS_AS(large_scale_gains(s, pos), GeometryError);
  CHECK_THROWS_AS(realize_channels(s, pos, 1), GeometryError);
}

TEST_CASE("realize_channels is deterministic and sized by the antenna counts") {
  const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, 1, two_uavs());
  const std::vector<Position3D> pos{{300.0, 300.0, 200.0}, {900.0, 1200.0, 300.0}};
  const ChannelState a = realize_channels(s, pos, 77);
  const ChannelState b = realize_channels(s, pos, 77);
  const ChannelState c = realize_channels(s, pos, 78);
  CHECK(a.gnb_to_ue[0] == b.gnb_to_ue[0]);
  CHECK(a.uav_to_ue[1][3] == b.uav_to_ue[1][3]);
  CHECK(a.uav_to_uav[0][1] == b.uav_to_uav[0][1]);
  CHECK_FALSE(a.gnb_to_uav[0] == c.gnb_to_uav[0]);
  CHECK(a.gnb_to_ue[0].size() == 8);
  CHECK(a.gnb_to_uav[1].size() == 8);
  CHECK(a.uav_to_ue[0][0].size() == 2);
  CHECK(a.uav_to_uav[1][0].size() == 2);
}

TEST_CASE("a link's realization does not depend on the other links") {
  const Scenario s = generate_scenario_a({2, 2, 100.0}, {}, 1, two_uavs());
  const std::vector<Position3D> pos{{300.0, 300.0, 200.0}, {900.0, 1200.0, 300.0}};
  const ChannelState with = realize_channels(s, pos, 5);
  const ChannelState without = realize_channels(without_uavs(s), {}, 5);
  for (std::size_t u = 0; u < 4; ++u) CHECK(with.gnb_to_ue[u] == without.gnb_to_ue[u]);
  const std::vector<char> mask{1, 0};
  const ChannelState masked = realize_channels(s, pos, 5, mask);
  CHECK(masked.gnb_to_uav[0] == with.gnb_to_uav[0]);
  CHECK(masked.gnb_to_uav[1].squaredNorm() == 0.0);
  CHECK(masked.gains.gnb_to_uav[1] == 0.0);
  CHECK(masked.uav_to_ue[1][0].squaredNorm() == 0.0);
}

TEST_CASE("property: fading vectors carry the large-scale gain on average") {
  const Scenario s = generate_scenario_a({1, 1, 10.0}, {}, 2);
  const std::vector<Position3D> pos{{700.0, 650.0, 300.0}};
  const ChannelState first = realize_channels(s, pos, 0);
  double ue = 0.0;
  double bh = 0.0;
  double au = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const ChannelState c = realize_channels(s, pos, static_cast<std::uint64_t>(i));
    ue += c.gnb_to_ue[0].squaredNorm();
    bh += c.gnb_to_uav[0].squaredNorm();
    au += c.uav_to_ue[0][0].squaredNorm();
  }
  CHECK(ue / n == doctest::Approx(first.gains.gnb_to_ue[0]).epsilon(0.02));
  CHECK(bh / n == doctest::Approx(first.gains.gnb_to_uav[0]).epsilon(0.02));
  CHECK(au / n == doctest::Approx(first.gains.uav_to_ue[0][0]).epsilon(0.02));
}

}  // TEST_SUITE
