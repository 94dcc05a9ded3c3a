#include "wdtn/channel.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace wdtn {

double path_loss(double d, double ref_gain, double exponent) {
  return ref_gain * std::pow(std::max(d, 1.0), -exponent);
}

double sample_fading(double k, RngStream& channel) {
  double phi = channel.uniform(0.0, 2.0 * std::numbers::pi);
  double z1 = channel.normal();
  double z2 = channel.normal();
  double los = std::sqrt(k / (k + 1.0));
  double scat = std::sqrt(1.0 / (k + 1.0)) * std::numbers::sqrt2 / 2.0;
  double re = los * std::cos(phi) + scat * z1;
  double im = los * std::sin(phi) + scat * z2;
  return re * re + im * im;
}

double link_gain(const Vec2& mu_pos, const Vec2& bs_pos,
                 const ScenarioConfig& cfg, RngStream& channel) {
  double pl = path_loss(distance(mu_pos, bs_pos), cfg.pathloss_ref_gain,
                        cfg.pathloss_exponent);
  return pl * sample_fading(cfg.rician_k, channel);
}

GainTable sample_gain_table(const std::vector<MuState>& mus,
                            const std::vector<BsState>& bss,
                            const std::vector<bool>& transmitting,
                            const ScenarioConfig& cfg, RngStream& channel) {
  GainTable t;
  t.n_mus = static_cast<int>(mus.size());
  t.n_bss = static_cast<int>(bss.size());
  t.g.assign(static_cast<size_t>(t.n_mus) * t.n_bss, 0.0);
  for (int i = 0; i < t.n_mus; ++i) {
    if (!transmitting[i]) continue;
    for (int b = 0; b < t.n_bss; ++b)
      t.g[static_cast<size_t>(i) * t.n_bss + b] =
          link_gain(mus[i].pos, bss[b].pos, cfg, channel);
  }
  return t;
}

double uplink_sinr(const GainTable& gains, const std::vector<double>& tx_power,
                   const std::vector<bool>& transmitting, int target_mu,
                   int serving_bs, double noise_power) {
  assert(transmitting[target_mu]);
  double interference = 0.0;
  for (int j = 0; j < gains.n_mus; ++j) {
    if (j == target_mu || !transmitting[j]) continue;
    interference += tx_power[j] * gains.at(j, serving_bs);
  }
  return tx_power[target_mu] * gains.at(target_mu, serving_bs) /
         (interference + noise_power);
}

double achievable_rate(double sinr, double bandwidth) {
  return bandwidth * std::log2(1.0 + sinr);
}

}  // namespace wdtn
