#pragma once

namespace rampweave {

// Physical constants and road parameters shared by every module.
// All values are immutable for the lifetime of the process.
struct Constants {
  double gps_error_m = 0.02;            // L1, RTK positioning error per vehicle
  double clock_error_s = 3e-9;          // onboard clock sync error
  double adhesion = 0.4;                // tire-road adhesion coefficient
  double road_resistance = 0.11;        // rolling resistance coefficient
  double vehicle_length_m = 5.0;        // uniform body length
  double accel_lane_m = 200.0;          // acceleration lane length
  double collision_duration_s = 0.2;    // inelastic impact duration
  double max_accel_ms2 = 6.0;           // comfort bound on commanded accel
  double gravity_ms2 = 9.8;
  double merge_angle_deg = 30.0;        // inclination while crossing the lane line
  double equal_speed_gap_m = 0.04;      // safe gap between equal-speed vehicles, == 2*L1

  // Severity above which a potential conflict is flagged critical, (0.3g)^2.
  constexpr double severity_critical() const { return 0.09 * gravity_ms2 * gravity_ms2; }
  // Braking term denominator 254*(phi+varphi), speeds in km/h.
  constexpr double braking_denominator() const { return 254.0 * (adhesion + road_resistance); }
};

inline constexpr Constants kConst{};

// Corridor layout. Station 0 is the ramp end where the acceleration lane begins.
struct Geometry {
  double ramp_start_m = -400.0;
  double ramp_end_m = 0.0;
  double accel_lane_begin_m = 0.0;
  double accel_lane_end_m = 200.0;
  double corridor_begin_m = -600.0;
  double corridor_end_m = 200.0;

  constexpr double ramp_length_m() const { return ramp_end_m - ramp_start_m; }
  constexpr double corridor_length_m() const { return corridor_end_m - corridor_begin_m; }
};

inline constexpr Geometry kGeometry{};

}  // namespace rampweave
