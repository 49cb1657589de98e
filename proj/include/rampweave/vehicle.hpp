#pragma once

#include <string>

#include "rampweave/constants.hpp"

namespace rampweave {

enum class VehicleClass { kMainline, kRamp };

inline const char* to_string(VehicleClass c) {
  return c == VehicleClass::kMainline ? "mainline" : "ramp";
}

// Instantaneous state of one simulated vehicle. Stations are signed mileposts
// of the front bumper; the bumper gap between leader L and follower F on the
// same lane is station(L) - station(F) - length(L).
struct VehicleState {
  int id = 0;
  VehicleClass cls = VehicleClass::kMainline;
  double station_m = 0.0;
  double speed_ms = 0.0;   // >= 0 at all times
  double accel_ms2 = 0.0;
  double length_m = kConst.vehicle_length_m;
};

inline double bumper_gap(const VehicleState& leader, const VehicleState& follower) {
  return leader.station_m - follower.station_m - leader.length_m;
}

}  // namespace rampweave
