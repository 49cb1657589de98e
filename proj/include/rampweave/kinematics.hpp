#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rampweave/constants.hpp"
#include "rampweave/units.hpp"

namespace rampweave {

// One constant-acceleration piece. The final segment of a trajectory is
// unbounded (t_end infinite) so evaluation is total on t >= 0.
struct TrajectorySegment {
  double t_begin_s = 0.0;
  double t_end_s = 0.0;  // may be +inf
  double station_m = 0.0;  // at t_begin
  double speed_ms = 0.0;   // at t_begin
  double accel_ms2 = 0.0;

  double duration_s() const { return t_end_s - t_begin_s; }
  double station_at(double t) const {
    const double u = t - t_begin_s;
    return station_m + speed_ms * u + 0.5 * accel_ms2 * u * u;
  }
  double speed_at(double t) const { return speed_ms + accel_ms2 * (t - t_begin_s); }
};

// Ordered constant-acceleration segments partitioning [0, inf). Station and
// speed are continuous at breakpoints; speed never goes negative inside a
// segment. Violations are construction errors.
class PiecewiseTrajectory {
 public:
  struct Sample {
    double station_m = 0.0;
    double speed_ms = 0.0;
    double accel_ms2 = 0.0;
  };

  static PiecewiseTrajectory make(std::vector<TrajectorySegment> segments) {
    constexpr double kTol = 1e-9;
    if (segments.empty()) throw std::invalid_argument("PiecewiseTrajectory: no segments");
    if (std::abs(segments.front().t_begin_s) > kTol) throw std::invalid_argument("PiecewiseTrajectory: must start at t=0");
    if (!std::isinf(segments.back().t_end_s)) throw std::invalid_argument("PiecewiseTrajectory: last segment must be unbounded");
    if (segments.back().accel_ms2 != 0.0) throw std::invalid_argument("PiecewiseTrajectory: unbounded tail must hold constant speed");
    for (size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      const bool last = i + 1 == segments.size();
      if (!last && s.t_end_s <= s.t_begin_s) throw std::invalid_argument("PiecewiseTrajectory: empty segment");
      if (s.speed_ms < -kTol) throw std::invalid_argument("PiecewiseTrajectory: negative speed");
      if (!last) {
        const double v_end = s.speed_at(s.t_end_s);
        if (v_end < -kTol) throw std::invalid_argument("PiecewiseTrajectory: speed reversal inside segment");
        const auto& n = segments[i + 1];
        if (std::abs(n.t_begin_s - s.t_end_s) > kTol) throw std::invalid_argument("PiecewiseTrajectory: time gap between segments");
        if (std::abs(n.station_m - s.station_at(s.t_end_s)) > kTol)
          throw std::invalid_argument("PiecewiseTrajectory: station discontinuity");
        if (std::abs(n.speed_ms - v_end) > kTol) throw std::invalid_argument("PiecewiseTrajectory: speed discontinuity");
      }
    }
    return PiecewiseTrajectory(std::move(segments));
  }

  Sample eval(double t) const {
    if (t < 0.0) throw std::invalid_argument("PiecewiseTrajectory::eval: t < 0");
    const TrajectorySegment& s = segment_at(t);
    return {s.station_at(t), s.speed_at(t), s.accel_ms2};
  }

  // Earliest time the station reaches `target`, if ever. Stations are
  // nondecreasing (speed >= 0), so the first crossing is well defined.
  std::optional<double> time_at_station(double target) const {
    for (const auto& s : segments_) {
      const double end_t = std::isinf(s.t_end_s) ? 0.0 : s.t_end_s;
      const double s_begin = s.station_m;
      const double s_end = std::isinf(s.t_end_s) ? std::numeric_limits<double>::infinity() : s.station_at(end_t);
      if (target < s_begin - 1e-12 || target > s_end + 1e-12) continue;
      const double c = s_begin - target;
      if (std::abs(s.accel_ms2) < 1e-15) {
        if (s.speed_ms < 1e-15) {
          if (std::abs(c) <= 1e-9) return s.t_begin_s;
          continue;
        }
        return s.t_begin_s - c / s.speed_ms;
      }
      const double disc = s.speed_ms * s.speed_ms - 2.0 * s.accel_ms2 * c;
      if (disc < 0.0) continue;
      const double u = (-s.speed_ms + std::sqrt(disc)) / s.accel_ms2;
      if (u >= -1e-12) return s.t_begin_s + std::max(u, 0.0);
    }
    return std::nullopt;
  }

  const std::vector<TrajectorySegment>& segments() const { return segments_; }

 private:
  explicit PiecewiseTrajectory(std::vector<TrajectorySegment> s) : segments_(std::move(s)) {}

  const TrajectorySegment& segment_at(double t) const {
    for (const auto& s : segments_)
      if (t < s.t_end_s) return s;
    return segments_.back();
  }

  std::vector<TrajectorySegment> segments_;
};

namespace kinematics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Constant-speed mainline motion from initial station x0.
inline PiecewiseTrajectory mainline_trajectory(double x0_m, double v0_kmh) {
  if (v0_kmh <= 0.0) throw std::invalid_argument("mainline_trajectory: v0 must be positive");
  return PiecewiseTrajectory::make({{0.0, kInf, x0_m, units::kmh_to_ms(v0_kmh), 0.0}});
}

// Duration of the constant-speed ramp phase from station r (< 0) to the ramp end.
inline double ramp_phase_duration(double r_m, double vR0_kmh) {
  if (r_m > 0.0) throw std::invalid_argument("ramp_phase_duration: vehicle past ramp end");
  if (r_m == 0.0) return 0.0;
  if (vR0_kmh <= 0.0) throw std::invalid_argument("ramp_phase_duration: stationary vehicle");
  return -r_m / units::kmh_to_ms(vR0_kmh);
}

// Duration of the uniform-acceleration phase from vR0 to v0.
inline double accel_phase_duration(double vR0_kmh, double v0_kmh, double a_ms2) {
  if (a_ms2 <= 0.0) throw std::invalid_argument("accel_phase_duration: acceleration must be positive");
  if (v0_kmh <= vR0_kmh) throw std::invalid_argument("accel_phase_duration: requires vR0 < v0");
  return (v0_kmh - vR0_kmh) / (3.6 * a_ms2);
}

// Station of the merge point, measured from the ramp end, for a vehicle that
// accelerates from vR0 to v0 at a constant rate.
inline double merge_point(double vR0_kmh, double v0_kmh, double a_ms2) {
  if (vR0_kmh < 0.0 || v0_kmh <= vR0_kmh) throw std::invalid_argument("merge_point: requires 0 <= vR0 < v0");
  const double t2 = accel_phase_duration(vR0_kmh, v0_kmh, a_ms2);
  return units::kmh_to_ms(vR0_kmh) * t2 + 0.5 * a_ms2 * t2 * t2;
}

// Free movement of a ramp vehicle: constant vR0 from station r to the ramp
// end, uniform acceleration a_r up to mainline speed v0, constant v0 after.
// Accepts r == 0 with any vR0 < v0 (launch directly from the ramp end).
inline PiecewiseTrajectory ramp_free_trajectory(double r_m, double vR0_kmh, double v0_kmh, double a_ms2) {
  if (r_m > 0.0) throw std::invalid_argument("ramp_free_trajectory: r must not be past the ramp end");
  if (vR0_kmh < 0.0 || vR0_kmh >= v0_kmh) throw std::invalid_argument("ramp_free_trajectory: requires 0 <= vR0 < v0");
  if (r_m < 0.0 && vR0_kmh <= 0.0) throw std::invalid_argument("ramp_free_trajectory: cannot reach ramp end at zero speed");
  const double t1 = ramp_phase_duration(r_m, vR0_kmh);
  const double t2 = accel_phase_duration(vR0_kmh, v0_kmh, a_ms2);
  const double vR0_ms = units::kmh_to_ms(vR0_kmh);
  const double v0_ms = units::kmh_to_ms(v0_kmh);
  const double s_merge = merge_point(vR0_kmh, v0_kmh, a_ms2);

  std::vector<TrajectorySegment> segs;
  if (t1 > 0.0) segs.push_back({0.0, t1, r_m, vR0_ms, 0.0});
  segs.push_back({t1, t1 + t2, 0.0, vR0_ms, a_ms2});
  segs.push_back({t1 + t2, kInf, s_merge, v0_ms, 0.0});
  return PiecewiseTrajectory::make(std::move(segs));
}

// Trajectory holding station and speed forever (a stopped vehicle).
inline PiecewiseTrajectory stationary_trajectory(double station_m) {
  return PiecewiseTrajectory::make({{0.0, kInf, station_m, 0.0, 0.0}});
}

// Constant speed, then uniform braking to a standstill at `stop_station`.
// The braking rate is chosen from the remaining distance.
inline PiecewiseTrajectory stop_at_trajectory(double station_m, double v_ms, double stop_station_m) {
  if (v_ms <= 0.0) return stationary_trajectory(station_m);
  const double dist = stop_station_m - station_m;
  if (dist <= 0.0) return stationary_trajectory(station_m);
  // Brake over the final stretch at no more than kBrake; cruise before it.
  constexpr double kBrake = 2.5;
  const double brake_dist = std::min(dist, v_ms * v_ms / (2.0 * kBrake));
  const double cruise = dist - brake_dist;
  const double t_cruise = cruise / v_ms;
  const double a = -v_ms * v_ms / (2.0 * brake_dist);
  const double t_brake = v_ms / -a;
  std::vector<TrajectorySegment> segs;
  if (t_cruise > 0.0) segs.push_back({0.0, t_cruise, station_m, v_ms, 0.0});
  segs.push_back({t_cruise, t_cruise + t_brake, station_m + cruise, v_ms, a});
  segs.push_back({t_cruise + t_brake, kInf, stop_station_m, 0.0, 0.0});
  return PiecewiseTrajectory::make(std::move(segs));
}

// Symmetric accelerate-then-decelerate adjustment: from v0, accelerate at
// a_acc for half the window, decelerate at -a_acc for the other half, ending
// back at v0 having gained a_acc * window^2 / 4 over a constant-v0 twin.
inline PiecewiseTrajectory two_phase_adjustment(double station_m, double v0_ms, double a_acc_ms2, double window_s) {
  if (window_s <= 0.0) throw std::invalid_argument("two_phase_adjustment: window must be positive");
  const double half = window_s / 2.0;
  const double s_mid = station_m + v0_ms * half + 0.5 * a_acc_ms2 * half * half;
  const double v_mid = v0_ms + a_acc_ms2 * half;
  const double s_end = s_mid + v_mid * half - 0.5 * a_acc_ms2 * half * half;
  return PiecewiseTrajectory::make({{0.0, half, station_m, v0_ms, a_acc_ms2},
                                    {half, window_s, s_mid, v_mid, -a_acc_ms2},
                                    {window_s, kInf, s_end, v0_ms, 0.0}});
}

}  // namespace kinematics
}  // namespace rampweave
