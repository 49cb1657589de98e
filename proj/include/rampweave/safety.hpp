#pragma once

#include <stdexcept>

#include "rampweave/constants.hpp"
#include "rampweave/units.hpp"

namespace rampweave::safety {

// Safe following distance split into its three physical sources.
struct SafeGapBreakdown {
  double positioning_m = 0.0;  // 2 * L1, both vehicles' GPS error
  double clock_m = 0.0;        // distance covered during the clock sync error
  double speed_diff_m = 0.0;   // braking margin for a faster follower
  double total_m = 0.0;        // sum of the three
};

// Minimum mainline gap that admits a merging vehicle.
struct MergeGapRequirement {
  double front_clearance_m = 0.0;  // merging vehicle to the gap's front vehicle
  double rear_clearance_m = 0.0;   // merging vehicle to the gap's rear vehicle
  double min_gap_m = 0.0;          // body length + both clearances
};

namespace detail {
// Speeds below this are indistinguishable from standstill; zeroing them keeps
// the clock term free of denormal noise.
inline double snap_zero(double v_ms) { return v_ms < 1e-9 ? 0.0 : v_ms; }
}  // namespace detail

// Distance covered by the pair during the clock synchronization error.
// Speeds in m/s.
inline double clock_error_distance(double v1_ms, double v2_ms) {
  if (v1_ms < 0.0 || v2_ms < 0.0) throw std::invalid_argument("clock_error_distance: negative speed");
  return kConst.clock_error_s * (detail::snap_zero(v1_ms) + detail::snap_zero(v2_ms));
}

// Braking margin kept for the speed difference. Applies only when the
// follower is faster than the leader; otherwise the pair is opening and the
// term vanishes. Speeds in km/h.
inline double speed_gap_distance(double v_follow_kmh, double v_lead_kmh) {
  if (v_follow_kmh < 0.0 || v_lead_kmh < 0.0) throw std::invalid_argument("speed_gap_distance: negative speed");
  if (v_follow_kmh <= v_lead_kmh) return 0.0;
  const double dv = v_follow_kmh - v_lead_kmh;
  return dv * dv / kConst.braking_denominator();
}

// Safe distance to be maintained between a leader and its follower.
// Speeds in m/s; the braking term converts to km/h internally.
inline SafeGapBreakdown safe_following_distance(double v_lead_ms, double v_follow_ms) {
  if (v_lead_ms < 0.0 || v_follow_ms < 0.0) throw std::invalid_argument("safe_following_distance: negative speed");
  SafeGapBreakdown b;
  b.positioning_m = 2.0 * kConst.gps_error_m;
  b.clock_m = clock_error_distance(v_lead_ms, v_follow_ms);
  b.speed_diff_m = speed_gap_distance(units::ms_to_kmh(v_follow_ms), units::ms_to_kmh(v_lead_ms));
  b.total_m = b.positioning_m + b.clock_m + b.speed_diff_m;
  return b;
}

// Minimum mainline gap as body length plus twice the symmetric safe distance.
inline double min_merge_gap_symmetric(double l_safe_m) {
  if (l_safe_m < 0.0) throw std::invalid_argument("min_merge_gap_symmetric: negative distance");
  return kConst.vehicle_length_m + 2.0 * l_safe_m;
}

// Clearance between the merging vehicle and one neighbor of the target gap.
// The squared speed difference applies on both sides regardless of sign.
// Speeds in km/h; v_rx is the merging vehicle's along-mainline component.
inline double merge_clearance(double v_rx_kmh, double v_neighbor_kmh) {
  if (v_rx_kmh < 0.0 || v_neighbor_kmh < 0.0) throw std::invalid_argument("merge_clearance: negative speed");
  const double dv = v_rx_kmh - v_neighbor_kmh;
  return 2.0 * kConst.gps_error_m + dv * dv / kConst.braking_denominator();
}

// Minimum gap between the target gap's front and rear vehicles that admits
// the merging vehicle. Speeds in km/h.
inline MergeGapRequirement min_merge_gap(double v_rx_kmh, double v_front_kmh, double v_rear_kmh) {
  MergeGapRequirement r;
  r.front_clearance_m = merge_clearance(v_rx_kmh, v_front_kmh);
  r.rear_clearance_m = merge_clearance(v_rx_kmh, v_rear_kmh);
  r.min_gap_m = kConst.vehicle_length_m + r.front_clearance_m + r.rear_clearance_m;
  return r;
}

}  // namespace rampweave::safety
