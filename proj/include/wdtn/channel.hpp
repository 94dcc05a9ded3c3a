#pragma once
// Uplink channel: distance path loss, Rician block fading, shared-band SINR.

#include <vector>

#include "wdtn/config.hpp"
#include "wdtn/rng.hpp"
#include "wdtn/types.hpp"

namespace wdtn {

// ref_gain * max(d, 1 m)^(-exponent); the clamp avoids the singularity at 0.
double path_loss(double d, double ref_gain, double exponent);

// Squared magnitude of  h = sqrt(k/(k+1)) e^{j phi} + sqrt(1/(k+1)) CN(0,1),
// phi uniform; unit mean for every k. Draw order: phi, then one normal pair.
// k = 0 degenerates to Rayleigh (|h|^2 ~ Exp(1)), k -> inf to |h|^2 -> 1.
double sample_fading(double k, RngStream& channel);

// path_loss(distance) * fresh fading draw.
double link_gain(const Vec2& mu_pos, const Vec2& bs_pos,
                 const ScenarioConfig& cfg, RngStream& channel);

// Per-slot gains for every transmitting MU towards every BS. Rows of
// non-transmitting MUs stay 0 (they radiate nothing). Draw order: MU
// ascending, then BS ascending.
struct GainTable {
  int n_mus = 0;
  int n_bss = 0;
  std::vector<double> g;  // n_mus * n_bss, row-major

  double at(int mu, int bs) const { return g[static_cast<size_t>(mu) * n_bss + bs]; }
};

GainTable sample_gain_table(const std::vector<MuState>& mus,
                            const std::vector<BsState>& bss,
                            const std::vector<bool>& transmitting,
                            const ScenarioConfig& cfg, RngStream& channel);

// SINR of target_mu at its serving BS: every other transmitting MU interferes
// network-wide on the single shared band.
double uplink_sinr(const GainTable& gains, const std::vector<double>& tx_power,
                   const std::vector<bool>& transmitting, int target_mu,
                   int serving_bs, double noise_power);

// Shannon rate in bit/s.
double achievable_rate(double sinr, double bandwidth);

}  // namespace wdtn
