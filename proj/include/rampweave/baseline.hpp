#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "rampweave/constants.hpp"
#include "rampweave/safety.hpp"
#include "rampweave/units.hpp"
#include "rampweave/vehicle.hpp"

namespace rampweave::baseline {

// Krauss-like car-following parameters. This baseline is a simplified stand-in
// for SUMO's Krauss/LC2013 pair, not a replication of it.
struct FollowerParams {
  double reaction_time_s = 1.0;
  double max_decel_ms2 = 4.5;
  double max_accel_ms2 = 2.6;
  double desired_speed_ms = 20.0;
};

// Safe-speed car-following update. Returns the follower's new speed after dt.
// With no leader the vehicle accelerates freely toward its desired speed.
inline double follow_step(const VehicleState& self, const std::optional<VehicleState>& leader,
                          const FollowerParams& p, double dt_s) {
  if (dt_s <= 0.0) throw std::invalid_argument("follow_step: dt must be positive");
  double v = self.speed_ms + p.max_accel_ms2 * dt_s;
  if (leader) {
    const double gap = bumper_gap(*leader, self);
    const double v_safe = leader->speed_ms +
                          (gap - leader->speed_ms * p.reaction_time_s) /
                              (self.speed_ms / p.max_decel_ms2 + p.reaction_time_s);
    v = std::min(v, v_safe);
  }
  v = std::min(v, p.desired_speed_ms);
  return std::max(v, 0.0);
}

// Gap acceptance at the acceleration lane: the adjacent mainline gap must be
// at least the minimum merge gap and both clearances must hold at current
// positions. Missing neighbors impose no constraint.
inline bool try_merge(const VehicleState& ramp, const std::optional<VehicleState>& front,
                      const std::optional<VehicleState>& rear, const safety::MergeGapRequirement& req) {
  if (front && rear) {
    const double gap = front->station_m - rear->station_m - front->length_m;
    if (gap < req.min_gap_m) return false;
  }
  if (front && bumper_gap(*front, ramp) < req.front_clearance_m) return false;
  if (rear && bumper_gap(ramp, *rear) < req.rear_clearance_m) return false;
  return true;
}

}  // namespace rampweave::baseline
