#include "iabsim/linkmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iabsim {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double useful_gain(const ComplexRow& h) { return h.squaredNorm(); }

// |h v_col|^2
double amplitude_sq(const ComplexRow& h, const ComplexMatrix& v, int col) {
  return std::norm((h * v.col(col))(0));
}

// sum_r P_r |h v_r|^2 over the links of one subband, optionally skipping one row.
double beam_power_at(const ComplexRow& h, const GnbSubband& sb, int skip_row) {
  double total = 0.0;
  for (int r = 0; r < sb.n_links(); ++r) {
    if (r == skip_row) continue;
    const double p = sb.precoder.power_diag[idx(r)];
    if (p == 0.0) continue;
    total += p * amplitude_sq(h, sb.precoder.beams, r);
  }
  return total;
}

}  // namespace

Association::Association(std::vector<int> serving, int n_uavs)
    : serving_(std::move(serving)), members_(idx(n_uavs + 1)) {
  if (n_uavs < 0) throw std::invalid_argument("number of UAVs must be non-negative");
  for (std::size_t u = 0; u < serving_.size(); ++u) {
    const int s = serving_[u];
    if (s < 0 || s > n_uavs) throw std::invalid_argument("serving station out of range");
    members_[idx(s)].push_back(static_cast<int>(u));
  }
}

Association Association::all_to_gnb(int n_users, int n_uavs) {
  return Association(std::vector<int>(idx(n_users), kGnbStation), n_uavs);
}

std::vector<int> Association::active_uavs() const {
  std::vector<int> out;
  for (int d = 1; d <= n_uavs(); ++d) {
    if (uav_active(d)) out.push_back(d);
  }
  return out;
}

CoScheduling schedule_coresources(const Association& a) {
  const int n_st = a.n_uavs() + 1;
  CoScheduling cs;
  cs.partner.assign(idx(a.n_users()), std::vector<int>(idx(n_st), -1));
  cs.gnb_subbands = std::max<int>(1, static_cast<int>(a.users_of(kGnbStation).size()));
  cs.gnb_subband.assign(idx(a.n_users()), 0);

  for (int own = 0; own < n_st; ++own) {
    const auto& mine = a.users_of(own);
    for (std::size_t pos = 0; pos < mine.size(); ++pos) {
      const int u = mine[pos];
      for (int other = 0; other < n_st; ++other) {
        if (other == own) continue;
        const auto& theirs = a.users_of(other);
        if (theirs.empty()) continue;
        cs.partner[idx(u)][idx(other)] = theirs[pos % theirs.size()];
      }
      cs.gnb_subband[idx(u)] = a.users_of(kGnbStation).empty()
                                   ? 0
                                   : static_cast<int>(pos % a.users_of(kGnbStation).size());
    }
  }
  return cs;
}

ServingPlan make_plan(Association association, PowerAllocation powers) {
  if (static_cast<int>(powers.ue_power.size()) != association.n_users() ||
      static_cast<int>(powers.bh_power.size()) != association.n_uavs()) {
    throw std::invalid_argument("power allocation does not match the association");
  }
  CoScheduling sched = schedule_coresources(association);
  return ServingPlan{std::move(association), std::move(sched), std::move(powers)};
}

int GnbSubband::row_of_uav(int d) const {
  const auto it = std::find(bh_uavs.begin(), bh_uavs.end(), d);
  return it == bh_uavs.end() ? -1 : static_cast<int>(it - bh_uavs.begin());
}

double GnbTransmission::transmit_power() const {
  double total = 0.0;
  for (const auto& sb : subbands) {
    if (sb.n_links() > 0) total += sb.precoder.transmit_power();
  }
  return total;
}

ComplexMatrix gnb_channel_matrix(const ChannelState& ch, std::span<const int> bh_uavs, int tue) {
  const auto rows = static_cast<Eigen::Index>(bh_uavs.size()) + (tue >= 0 ? 1 : 0);
  const Eigen::Index n =
      !ch.gnb_to_ue.empty() ? ch.gnb_to_ue.front().size() : ch.gnb_to_uav.front().size();
  ComplexMatrix h(rows, n);
  Eigen::Index r = 0;
  for (int d : bh_uavs) h.row(r++) = ch.gnb_to_uav[idx(d - 1)];
  if (tue >= 0) h.row(r) = ch.gnb_to_ue[idx(tue)];
  return h;
}

GnbTransmission build_gnb_transmission(const ChannelState& ch, const ServingPlan& plan,
                                       double gnb_max_power) {
  const Association& a = plan.association;
  const std::vector<int> bh = a.active_uavs();
  const auto& tues = a.users_of(kGnbStation);

  GnbTransmission tx;
  const int n_sub = plan.schedule.gnb_subbands;
  tx.budget_per_subband = gnb_max_power / n_sub;
  for (int s = 0; s < n_sub; ++s) {
    GnbSubband sb;
    sb.bh_uavs = bh;
    sb.tue = tues.empty() ? -1 : tues[idx(s)];
    if (sb.n_links() == 0) {
      tx.subbands.push_back(std::move(sb));
      continue;
    }
    sb.precoder.beams = build_lzfbf(gnb_channel_matrix(ch, sb.bh_uavs, sb.tue));
    const std::vector<double> costs = sb.precoder.costs();
    std::vector<double> p(idx(sb.n_links()));
    for (std::size_t r = 0; r < bh.size(); ++r) {
      p[r] = plan.powers.bh_power[idx(bh[r] - 1)] / costs[r];
    }
    if (sb.tue >= 0) {
      const auto r = idx(sb.tue_row());
      p[r] = plan.powers.ue_power[idx(sb.tue)] / costs[r];
    }
    sb.precoder.power_diag = enforce_budget(p, costs, tx.budget_per_subband);
    tx.subbands.push_back(std::move(sb));
  }
  return tx;
}

double sinr_aue(int u, const ChannelState& ch, const ServingPlan& plan, const GnbTransmission& tx,
                double noise) {
  const Association& a = plan.association;
  if (!a.served_by_uav(u)) throw std::invalid_argument("sinr_aue: UE is not served by a UAV");
  const int d = a.server(u);
  const auto& pw = plan.powers.ue_power;
  const double signal = pw[idx(u)] * useful_gain(ch.uav_to_ue[idx(d - 1)][idx(u)]);

  double interference = 0.0;
  for (int j = 1; j <= a.n_uavs(); ++j) {
    if (j == d) continue;
    const int p = plan.schedule.partner[idx(u)][idx(j)];
    if (p >= 0) interference += pw[idx(p)] * useful_gain(ch.uav_to_ue[idx(j - 1)][idx(u)]);
  }
  const GnbSubband& sb = tx.subbands[idx(plan.schedule.gnb_subband[idx(u)])];
  interference += beam_power_at(ch.gnb_to_ue[idx(u)], sb, -1);
  return signal / (interference + noise);
}

double tue_interference(int s, const ChannelState& ch, const ServingPlan& plan,
                        const GnbTransmission& tx, double noise) {
  const GnbSubband& sb = tx.subbands[idx(s)];
  const int u = sb.tue;
  double interference = beam_power_at(ch.gnb_to_ue[idx(u)], sb, sb.tue_row());
  const Association& a = plan.association;
  for (int j = 1; j <= a.n_uavs(); ++j) {
    const int p = plan.schedule.partner[idx(u)][idx(j)];
    if (p >= 0) {
      interference += plan.powers.ue_power[idx(p)] * useful_gain(ch.uav_to_ue[idx(j - 1)][idx(u)]);
    }
  }
  return interference + noise;
}

double sinr_tue(int u, const ChannelState& ch, const ServingPlan& plan, const GnbTransmission& tx,
                double noise) {
  if (plan.association.served_by_uav(u)) {
    throw std::invalid_argument("sinr_tue: UE is not served by the gNB");
  }
  const int s = plan.schedule.gnb_subband[idx(u)];
  const GnbSubband& sb = tx.subbands[idx(s)];
  const int row = sb.tue_row();
  const double signal =
      sb.precoder.power_diag[idx(row)] * amplitude_sq(ch.gnb_to_ue[idx(u)], sb.precoder.beams, row);
  return signal / tue_interference(s, ch, plan, tx, noise);
}

double bh_interference(int d, int s, const ChannelState& ch, const ServingPlan& plan,
                       const GnbTransmission& tx, double noise) {
  const GnbSubband& sb = tx.subbands[idx(s)];
  const ComplexRow& h = ch.gnb_to_uav[idx(d - 1)];
  double interference = beam_power_at(h, sb, sb.row_of_uav(d));
  const Association& a = plan.association;
  for (int j = 1; j <= a.n_uavs(); ++j) {
    if (j == d) continue;
    double total = 0.0;
    for (int i : a.users_of(j)) total += plan.powers.ue_power[idx(i)];
    if (total > 0.0) interference += total * useful_gain(ch.uav_to_uav[idx(j - 1)][idx(d - 1)]);
  }
  return interference + noise;
}

double sinr_bh(int d, const ChannelState& ch, const ServingPlan& plan, const GnbTransmission& tx,
               double noise) {
  if (!plan.association.uav_active(d)) return 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < tx.subbands.size(); ++s) {
    const GnbSubband& sb = tx.subbands[s];
    const int row = sb.row_of_uav(d);
    const double signal = sb.precoder.power_diag[idx(row)] *
                          amplitude_sq(ch.gnb_to_uav[idx(d - 1)], sb.precoder.beams, row);
    worst = std::min(worst,
                     signal / bh_interference(d, static_cast<int>(s), ch, plan, tx, noise));
  }
  return worst;
}

double avg_sinr_aue(int u, const LargeScaleGains& g, const ServingPlan& plan, double noise) {
  const Association& a = plan.association;
  if (!a.served_by_uav(u)) throw std::invalid_argument("avg_sinr_aue: UE is not served by a UAV");
  const int d = a.server(u);
  const auto& pw = plan.powers;
  const double signal = pw.ue_power[idx(u)] * g.uav_to_ue[idx(d - 1)][idx(u)];

  double interference = 0.0;
  for (int j = 1; j <= a.n_uavs(); ++j) {
    if (j == d) continue;
    const int p = plan.schedule.partner[idx(u)][idx(j)];
    if (p >= 0) interference += pw.ue_power[idx(p)] * g.uav_to_ue[idx(j - 1)][idx(u)];
  }
  double gnb_power = 0.0;
  for (int k : a.active_uavs()) gnb_power += pw.bh_power[idx(k - 1)];
  const int t = plan.schedule.partner[idx(u)][kGnbStation];
  if (t >= 0) gnb_power += pw.ue_power[idx(t)];
  interference += g.gnb_to_ue[idx(u)] * gnb_power;
  return signal / (interference + noise);
}

double avg_sinr_tue(int u, const LargeScaleGains& g, const ServingPlan& plan, double noise) {
  const Association& a = plan.association;
  if (a.served_by_uav(u)) throw std::invalid_argument("avg_sinr_tue: UE is not served by the gNB");
  const double signal = plan.powers.ue_power[idx(u)] * g.gnb_to_ue[idx(u)];
  double interference = 0.0;
  for (int j = 1; j <= a.n_uavs(); ++j) {
    const int p = plan.schedule.partner[idx(u)][idx(j)];
    if (p >= 0) interference += plan.powers.ue_power[idx(p)] * g.uav_to_ue[idx(j - 1)][idx(u)];
  }
  return signal / (interference + noise);
}

double avg_sinr_bh(int d, const LargeScaleGains& g, const ServingPlan& plan, double noise) {
  const Association& a = plan.association;
  if (!a.uav_active(d)) return 0.0;
  const double signal = plan.powers.bh_power[idx(d - 1)] * g.gnb_to_uav[idx(d - 1)];
  double interference = 0.0;
  for (int j = 1; j <= a.n_uavs(); ++j) {
    if (j == d) continue;
    double total = 0.0;
    for (int i : a.users_of(j)) total += plan.powers.ue_power[idx(i)];
    interference += total * g.uav_to_uav[idx(j - 1)][idx(d - 1)];
  }
  return signal / (interference + noise);
}

LinkReport sum_rate(std::vector<double> sinr, std::vector<double> sinr_bh,
                    const Association& association, double bandwidth) {
  LinkReport r;
  r.rate.resize(sinr.size());
  for (std::size_t u = 0; u < sinr.size(); ++u) {
    const auto share = association.users_of(association.server(static_cast<int>(u))).size();
    r.rate[u] = bandwidth / static_cast<double>(share) * std::log2(1.0 + sinr[u]);
    r.sum_rate += r.rate[u];
  }
  r.sinr = std::move(sinr);
  r.sinr_bh = std::move(sinr_bh);
  return r;
}

LinkReport evaluate_instant(const ChannelState& ch, const ServingPlan& plan,
                            const GnbTransmission& tx, const RadioConfig& radio) {
  const Association& a = plan.association;
  std::vector<double> sinr(idx(a.n_users()));
  for (int u = 0; u < a.n_users(); ++u) {
    sinr[idx(u)] = a.served_by_uav(u) ? sinr_aue(u, ch, plan, tx, radio.noise_power)
                                      : sinr_tue(u, ch, plan, tx, radio.noise_power);
  }
  std::vector<double> bh(idx(a.n_uavs()));
  for (int d = 1; d <= a.n_uavs(); ++d) bh[idx(d - 1)] = sinr_bh(d, ch, plan, tx, radio.noise_power);
  return sum_rate(std::move(sinr), std::move(bh), a, radio.bandwidth);
}

LinkReport evaluate_average(const LargeScaleGains& g, const ServingPlan& plan,
                            const RadioConfig& radio) {
  const Association& a = plan.association;
  std::vector<double> sinr(idx(a.n_users()));
  for (int u = 0; u < a.n_users(); ++u) {
    sinr[idx(u)] = a.served_by_uav(u) ? avg_sinr_aue(u, g, plan, radio.noise_power)
                                      : avg_sinr_tue(u, g, plan, radio.noise_power);
  }
  std::vector<double> bh(idx(a.n_uavs()));
  for (int d = 1; d <= a.n_uavs(); ++d) bh[idx(d - 1)] = avg_sinr_bh(d, g, plan, radio.noise_power);
  return sum_rate(std::move(sinr), std::move(bh), a, radio.bandwidth);
}

}  // namespace iabsim
