#include "wdtn/mobility.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace wdtn {

Kinematics step_kinematics(double speed, double direction,
                           double mean_direction, const MobilityParams& p,
                           RngStream& mobility) {
  double w1 = mobility.normal();
  double w2 = mobility.normal();
  double noise = std::sqrt(1.0 - p.alpha * p.alpha);
  Kinematics k;
  k.speed = p.alpha * speed + (1.0 - p.alpha) * p.mean_speed +
            noise * p.speed_sigma * w1;
  if (k.speed < 0.0) k.speed = 0.0;
  k.direction = p.alpha * direction + (1.0 - p.alpha) * mean_direction +
                noise * p.direction_sigma * w2;
  return k;
}

Moved step_position(const Vec2& pos, double speed, double direction, double dt,
                    double area_side) {
  Moved m;
  m.pos.x = pos.x + dt * speed * std::cos(direction);
  m.pos.y = pos.y + dt * speed * std::sin(direction);
  m.direction = direction;
  while (m.pos.x < 0.0 || m.pos.x > area_side) {
    if (m.pos.x < 0.0)
      m.pos.x = -m.pos.x;
    else
      m.pos.x = 2.0 * area_side - m.pos.x;
    m.direction = std::numbers::pi - m.direction;
  }
  while (m.pos.y < 0.0 || m.pos.y > area_side) {
    if (m.pos.y < 0.0)
      m.pos.y = -m.pos.y;
    else
      m.pos.y = 2.0 * area_side - m.pos.y;
    m.direction = -m.direction;
  }
  assert(m.pos.x >= 0.0 && m.pos.x <= area_side);
  assert(m.pos.y >= 0.0 && m.pos.y <= area_side);
  return m;
}

}  // namespace wdtn
