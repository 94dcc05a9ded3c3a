#pragma once
// Gauss-Markov mobility with reflective boundaries.

#include "wdtn/config.hpp"
#include "wdtn/rng.hpp"
#include "wdtn/types.hpp"

namespace wdtn {

struct Kinematics {
  double speed = 0.0;
  double direction = 0.0;
};

// One autoregressive step:
//   speed'     = a*speed     + (1-a)*mean_speed     + sqrt(1-a^2)*speed_sigma*w1
//   direction' = a*direction + (1-a)*mean_direction + sqrt(1-a^2)*direction_sigma*w2
// with w1, w2 standard normal (drawn in that order); speed' clamped at 0.
// a = 1 freezes the state, a = 0 gives i.i.d. draws around the means.
Kinematics step_kinematics(double speed, double direction,
                           double mean_direction, const MobilityParams& p,
                           RngStream& mobility);

struct Moved {
  Vec2 pos;
  double direction = 0.0;
};

// Advance dt at constant (speed, direction), then reflect off the walls of
// [0, area_side]^2: position mirrored, the offending velocity component
// negated (x-wall: direction -> pi - direction; y-wall: direction -> -direction).
Moved step_position(const Vec2& pos, double speed, double direction, double dt,
                    double area_side);

}  // namespace wdtn
