#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rampweave/constants.hpp"
#include "rampweave/kinematics.hpp"
#include "rampweave/safety.hpp"
#include "rampweave/units.hpp"
#include "rampweave/vehicle.hpp"

namespace rampweave::planner {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A mainline vehicle predicted to occupy the ramp vehicle's merge point.
struct ConflictReport {
  int ramp_id = 0;
  int mainline_id = 0;
  double t_merge_s = 0.0;         // t1 + t2 from the plan instant
  double ramp_station_m = 0.0;    // merge point of the unadjusted ramp vehicle
  double mainline_station_m = 0.0;
};

enum class GapMode { kDirectMerge, kGapCreation };

struct GapSelection {
  std::optional<int> front_id;  // X, absent when merging ahead of the whole fleet
  std::optional<int> rear_id;   // Y, absent when merging behind the whole fleet
  double s_front_m = kInf;      // gap ahead of the conflict vehicle
  double s_behind_m = kInf;     // gap behind the conflict vehicle
  double gap_length_m = kInf;   // length of the selected gap
  GapMode mode = GapMode::kDirectMerge;
};

// Speed adjustment of mainline vehicle X that opens the minimum merge gap:
// uniform acceleration for half the window, the exact opposite deceleration
// for the other half, returning to v0 with delta_l of extra distance gained.
struct GapCreationProfile {
  int vehicle_id = 0;
  double start_offset_s = 0.0;  // maneuver begins this long after the plan instant (t1)
  double delta_l_m = 0.0;       // distance X must gain
  double t2p_s = 0.0;           // adjustment window, also the ramp acceleration phase
  double a_acc_ms2 = 0.0;
  double a_dec_ms2 = 0.0;       // == -a_acc
  double t_acc_s = 0.0;         // == t2p / 2
  double t_dec_s = 0.0;         // == t2p / 2
  double v_peak_ms = 0.0;       // speed at the phase switch
  double ramp_accel_ms2 = 0.0;  // ramp vehicle's adjusted acceleration
  double merge_station_m = 0.0; // ramp merge point after adjustment
};

struct FreeFlowPlan {
  double ramp_accel_ms2 = 0.0;
  double merge_station_m = 0.0;
  double merge_t_rel_s = 0.0;
  PiecewiseTrajectory trajectory;
};

struct MergePlan {
  double ramp_accel_ms2 = 0.0;
  double merge_station_m = 0.0;
  double merge_t_rel_s = 0.0;
  PiecewiseTrajectory trajectory;
  std::optional<GapCreationProfile> x_adjustment;
  GapSelection selection;
};

struct HoldPlan {};

using PlanResult = std::variant<FreeFlowPlan, MergePlan, HoldPlan>;

// Snapshot of one mainline vehicle at the plan instant. All mainline traffic
// moves at the common scenario speed v0; `adjustable` marks vehicles that may
// be commanded through a gap-creation maneuver (not mid-maneuver, actually on
// the mainline, not about to exit).
struct FleetVehicle {
  int id = 0;
  double station_m = 0.0;
  bool adjustable = true;
};

struct PlanContext {
  int ramp_id = 0;
  double ramp_station_m = -400.0;  // r <= 0
  double ramp_speed_kmh = 0.0;     // constant phase-1 speed; 0 for a held vehicle at the ramp end
  double v0_kmh = 72.0;
  double default_ar_ms2 = 2.0;
  safety::MergeGapRequirement requirement;

  double t1_s() const { return kinematics::ramp_phase_duration(ramp_station_m, ramp_speed_kmh); }
};

// Candidate handed to the engine for a full trajectory-level audit before the
// planner commits to it.
struct CandidatePlan {
  GapMode mode = GapMode::kDirectMerge;
  double ramp_accel_ms2 = 0.0;
  double merge_station_m = 0.0;
  double merge_t_rel_s = 0.0;
  PiecewiseTrajectory trajectory;
  std::optional<GapCreationProfile> x_adjustment;
  std::optional<int> front_id, rear_id;
};

using Verifier = std::function<bool(const CandidatePlan&)>;

inline bool accept_all(const CandidatePlan&) { return true; }

// Lowest ramp acceleration that still reaches v0 within the acceleration lane.
inline double accel_lower_bound(double v0_kmh, double vR0_kmh) {
  if (v0_kmh <= vR0_kmh || vR0_kmh < 0.0) throw std::invalid_argument("accel_lower_bound: requires 0 <= vR0 < v0");
  const double v0 = units::kmh_to_ms(v0_kmh);
  const double vr = units::kmh_to_ms(vR0_kmh);
  return (v0 * v0 - vr * vr) / (2.0 * kConst.accel_lane_m);
}

inline bool accel_feasible(double a_ms2, double v0_kmh, double vR0_kmh) {
  if (a_ms2 <= 0.0 || a_ms2 > kConst.max_accel_ms2) return false;
  if (a_ms2 < accel_lower_bound(v0_kmh, vR0_kmh) - 1e-12) return false;
  const double s = kinematics::merge_point(vR0_kmh, v0_kmh, a_ms2);
  return s > 0.0 && s < kConst.accel_lane_m;
}

namespace detail {

// Acceleration that lands the merge point a fixed signed offset from an
// anchor vehicle travelling at v0. `anchor_station_m` is the anchor's station
// at the plan instant, `offset_m` is merge station minus anchor station at
// the merge instant. Solves the merge-position equation in closed form.
inline std::optional<double> solve_anchored_accel(double anchor_station_m, double offset_m, double t1_s,
                                                  double v0_kmh, double vR0_kmh) {
  const double dv = v0_kmh - vR0_kmh;
  if (dv <= 0.0) return std::nullopt;
  const double inner = anchor_station_m + units::kmh_to_ms(v0_kmh) * t1_s + offset_m;
  if (inner >= -1e-12) return std::nullopt;  // no positive-acceleration solution
  return -(dv * dv) / (25.92 * inner);
}

}  // namespace detail

// Acceleration that merges the ramp vehicle exactly one clearance plus one
// body length behind the target gap's front vehicle (initial station x).
// Returns nothing when the geometry admits no acceleration inside the comfort
// bound and the acceleration-lane window.
inline std::optional<double> solve_direct_merge_accel(double x_m, double r_m, double v0_kmh, double vR0_kmh,
                                                      double clearance_front_m) {
  if (r_m >= 0.0) throw std::invalid_argument("solve_direct_merge_accel: ramp vehicle must be upstream of the ramp end");
  if (vR0_kmh <= 0.0 || vR0_kmh >= v0_kmh) throw std::invalid_argument("solve_direct_merge_accel: requires 0 < vR0 < v0");
  const double t1 = kinematics::ramp_phase_duration(r_m, vR0_kmh);
  auto a = detail::solve_anchored_accel(x_m, -kConst.vehicle_length_m - clearance_front_m, t1, v0_kmh, vR0_kmh);
  if (!a || !accel_feasible(*a, v0_kmh, vR0_kmh)) return std::nullopt;
  return a;
}

// Identify the mainline vehicle whose projected station brackets the ramp
// vehicle's unadjusted merge point. Fleet must be ordered by station,
// furthest downstream first. Ties on the band go to the larger milepost.
inline std::optional<ConflictReport> identify_conflict(const VehicleState& ramp, const std::vector<FleetVehicle>& fleet,
                                                       double v0_kmh, double vR0_kmh, double a_r_ms2) {
  if (fleet.empty()) return std::nullopt;
  const double t1 = kinematics::ramp_phase_duration(ramp.station_m, vR0_kmh);
  const double t2 = kinematics::accel_phase_duration(vR0_kmh, v0_kmh, a_r_ms2);
  const double t_m = t1 + t2;
  const double s_ramp = kinematics::merge_point(vR0_kmh, v0_kmh, a_r_ms2);
  const double band = kConst.vehicle_length_m + kConst.equal_speed_gap_m;
  const double v0_ms = units::kmh_to_ms(v0_kmh);
  for (const auto& m : fleet) {  // descending station: first hit is the largest milepost
    const double s_main = m.station_m + v0_ms * t_m;
    if (s_ramp >= s_main - band && s_ramp <= s_main + band)
      return ConflictReport{ramp.id, m.id, t_m, s_ramp, s_main};
  }
  return std::nullopt;
}

namespace detail {

struct GapCandidate {
  std::optional<int> front_id, rear_id;
  std::optional<size_t> front_idx, rear_idx;  // indices into the fleet
  double length_m = kInf;
};

// Gaps around the conflict vehicle, ordered per the selection rules: the
// nearer pair first (front preferred on ties), then alternating outward.
inline std::vector<GapCandidate> enumerate_gaps(const std::vector<FleetVehicle>& fleet, size_t c_idx,
                                                double min_gap_m, size_t breadth = 8) {
  auto gap_at = [&](size_t front_idx) {  // gap between fleet[front_idx] and fleet[front_idx + 1]
    GapCandidate g;
    g.front_idx = front_idx;
    g.rear_idx = front_idx + 1;
    g.front_id = fleet[front_idx].id;
    g.rear_id = fleet[front_idx + 1].id;
    g.length_m = fleet[front_idx].station_m - fleet[front_idx + 1].station_m - kConst.vehicle_length_m;
    return g;
  };
  auto edge_front = [&]() {  // unbounded gap ahead of the whole fleet
    GapCandidate g;
    g.rear_idx = 0;
    g.rear_id = fleet[0].id;
    return g;
  };
  auto edge_rear = [&]() {  // unbounded gap behind the whole fleet
    GapCandidate g;
    g.front_idx = fleet.size() - 1;
    g.front_id = fleet.back().id;
    return g;
  };

  // k-th gap on the front side of the conflict vehicle (k = 1 is adjacent).
  auto front_gap = [&](size_t k) -> std::optional<GapCandidate> {
    if (c_idx + 1 < k) return std::nullopt;
    if (c_idx + 1 == k) return edge_front();
    return gap_at(c_idx - k);
  };
  auto rear_gap = [&](size_t k) -> std::optional<GapCandidate> {
    if (c_idx + k > fleet.size()) return std::nullopt;
    if (c_idx + k == fleet.size()) return edge_rear();
    return gap_at(c_idx + k - 1);
  };

  std::vector<GapCandidate> out;
  const auto f1 = front_gap(1);
  const auto r1 = rear_gap(1);
  const double s_front = f1 ? f1->length_m : -kInf;
  const double s_behind = r1 ? r1->length_m : -kInf;
  const bool front_first = s_front >= s_behind;
  if (front_first) {
    if (f1) out.push_back(*f1);
    if (r1) out.push_back(*r1);
  } else {
    if (r1) out.push_back(*r1);
    if (f1) out.push_back(*f1);
  }
  for (size_t k = 2; k <= breadth; ++k) {
    if (auto g = front_gap(k)) out.push_back(*g);
    if (auto g = rear_gap(k)) out.push_back(*g);
  }
  std::erase_if(out, [&](const GapCandidate& g) { return g.length_m < min_gap_m; });
  return out;
}

}  // namespace detail

// Scenario-1 adjustment: mainline vehicle X (initial station x) accelerates
// then symmetrically decelerates to open the minimum merge gap over the gap
// to Y (initial station y); the ramp vehicle's acceleration phase is
// stretched to land exactly one front clearance behind X's adjusted position.
// `leader_gap_m`, when known, is X's bumper gap to its own leader at the plan
// instant and gates the maneuver on the safe following distance throughout.
inline std::optional<GapCreationProfile> plan_gap_creation(double x_m, double y_m, double r_m, double v0_kmh,
                                                           double vR0_kmh, const safety::MergeGapRequirement& req,
                                                           std::optional<double> leader_gap_m = std::nullopt) {
  if (vR0_kmh < 0.0 || vR0_kmh >= v0_kmh) throw std::invalid_argument("plan_gap_creation: requires 0 <= vR0 < v0");
  const double gap = x_m - y_m - kConst.vehicle_length_m;
  if (gap >= req.min_gap_m) {
    // No deficit: the gap already admits a direct merge.
    return std::nullopt;
  }
  const double delta_l = req.min_gap_m - gap;
  const double t1 = kinematics::ramp_phase_duration(r_m, vR0_kmh);
  const double v0_ms = units::kmh_to_ms(v0_kmh);

  // Window length from the merge-point consistency requirement: at t1 + t2'
  // the merge point sits exactly front clearance + body length behind X.
  const double c = x_m + v0_ms * t1 + delta_l - kConst.vehicle_length_m - req.front_clearance_m;
  const double t2p = 7.2 * c / (vR0_kmh - v0_kmh);
  if (!(t2p > 0.0)) return std::nullopt;

  GapCreationProfile p;
  p.start_offset_s = t1;
  p.delta_l_m = delta_l;
  p.t2p_s = t2p;
  p.ramp_accel_ms2 = (v0_kmh - vR0_kmh) / (3.6 * t2p);
  p.merge_station_m = (v0_kmh + vR0_kmh) * t2p / 7.2;
  p.a_acc_ms2 = 4.0 * delta_l / (t2p * t2p);
  p.a_dec_ms2 = -p.a_acc_ms2;
  p.t_acc_s = t2p / 2.0;
  p.t_dec_s = t2p / 2.0;
  p.v_peak_ms = v0_ms + p.a_acc_ms2 * p.t_acc_s;

  if (!accel_feasible(p.ramp_accel_ms2, v0_kmh, vR0_kmh)) return std::nullopt;
  if (p.a_acc_ms2 > kConst.max_accel_ms2) return std::nullopt;

  if (leader_gap_m) {
    // X closes on its leader by the gained distance; the safe following
    // distance must hold at every point of the maneuver.
    const double v0_pair_kmh = v0_kmh;
    for (double tau = 0.0; tau <= t2p + 1e-9; tau += 0.05) {
      const double tt = std::min(tau, t2p);
      double gain, v_x;
      if (tt <= t2p / 2.0) {
        gain = 0.5 * p.a_acc_ms2 * tt * tt;
        v_x = v0_ms + p.a_acc_ms2 * tt;
      } else {
        const double back = t2p - tt;
        gain = delta_l - 0.5 * p.a_acc_ms2 * back * back;
        v_x = v0_ms + p.a_acc_ms2 * back;
      }
      const double need = safety::safe_following_distance(units::kmh_to_ms(v0_pair_kmh), v_x).total_m;
      if (*leader_gap_m - gain < need) return std::nullopt;
    }
  }
  return p;
}

namespace detail {

struct SelectionOutcome {
  GapSelection selection;
  std::optional<CandidatePlan> plan;  // absent only for a GapCreation that failed entirely
};

inline CandidatePlan make_direct_candidate(const PlanContext& ctx, double a, const GapCandidate& g) {
  CandidatePlan c;
  c.mode = GapMode::kDirectMerge;
  c.ramp_accel_ms2 = a;
  c.merge_station_m = kinematics::merge_point(ctx.ramp_speed_kmh, ctx.v0_kmh, a);
  c.merge_t_rel_s = ctx.t1_s() + kinematics::accel_phase_duration(ctx.ramp_speed_kmh, ctx.v0_kmh, a);
  c.trajectory = kinematics::ramp_free_trajectory(ctx.ramp_station_m, ctx.ramp_speed_kmh, ctx.v0_kmh, a);
  c.front_id = g.front_id;
  c.rear_id = g.rear_id;
  return c;
}

inline std::optional<SelectionOutcome> try_select(const PlanContext& ctx, const std::vector<FleetVehicle>& fleet,
                                                  size_t c_idx, const Verifier& verify) {
  const auto& req = ctx.requirement;
  const double t1 = ctx.t1_s();
  const double v0_ms = units::kmh_to_ms(ctx.v0_kmh);

  auto fill_sides = [&](GapSelection& sel) {
    sel.s_front_m = c_idx > 0
        ? fleet[c_idx - 1].station_m - fleet[c_idx].station_m - kConst.vehicle_length_m
        : kInf;
    sel.s_behind_m = c_idx + 1 < fleet.size()
        ? fleet[c_idx].station_m - fleet[c_idx + 1].station_m - kConst.vehicle_length_m
        : kInf;
  };

  for (const auto& g : enumerate_gaps(fleet, c_idx, req.min_gap_m)) {
    std::optional<double> a;
    if (g.front_idx) {
      a = solve_anchored_accel(fleet[*g.front_idx].station_m, -kConst.vehicle_length_m - req.front_clearance_m, t1,
                               ctx.v0_kmh, ctx.ramp_speed_kmh);
    } else if (g.rear_idx) {
      a = solve_anchored_accel(fleet[*g.rear_idx].station_m, kConst.vehicle_length_m + req.rear_clearance_m, t1,
                               ctx.v0_kmh, ctx.ramp_speed_kmh);
    }
    if (!a || !accel_feasible(*a, ctx.v0_kmh, ctx.ramp_speed_kmh)) continue;

    CandidatePlan cand = make_direct_candidate(ctx, *a, g);
    // The rear side of the gap must also clear at the merge instant.
    if (g.rear_idx) {
      const double s_rear = fleet[*g.rear_idx].station_m + v0_ms * cand.merge_t_rel_s;
      if (cand.merge_station_m - s_rear - kConst.vehicle_length_m < req.rear_clearance_m - 1e-9) continue;
    }
    if (g.front_idx) {
      const double s_front = fleet[*g.front_idx].station_m + v0_ms * cand.merge_t_rel_s;
      if (s_front - cand.merge_station_m - kConst.vehicle_length_m < req.front_clearance_m - 1e-9) continue;
    }
    if (!verify(cand)) continue;

    SelectionOutcome out;
    out.selection.front_id = g.front_id;
    out.selection.rear_id = g.rear_id;
    out.selection.gap_length_m = g.length_m;
    out.selection.mode = GapMode::kDirectMerge;
    fill_sides(out.selection);
    out.plan = std::move(cand);
    return out;
  }

  // No qualifying gap admits the vehicle: open the gap ahead of the conflict
  // vehicle instead (scenario 1, X = the conflict vehicle's leader).
  if (c_idx == 0) return std::nullopt;
  const auto& x_veh = fleet[c_idx - 1];
  const auto& y_veh = fleet[c_idx];
  if (!x_veh.adjustable) return std::nullopt;
  if (ctx.ramp_speed_kmh <= 0.0) return std::nullopt;  // a held vehicle cannot stretch a zero-speed phase

  std::optional<double> leader_gap;
  if (c_idx >= 2) leader_gap = fleet[c_idx - 2].station_m - x_veh.station_m - kConst.vehicle_length_m;
  auto prof = plan_gap_creation(x_veh.station_m, y_veh.station_m, ctx.ramp_station_m, ctx.v0_kmh, ctx.ramp_speed_kmh,
                                req, leader_gap);
  if (!prof) return std::nullopt;
  prof->vehicle_id = x_veh.id;

  CandidatePlan cand;
  cand.mode = GapMode::kGapCreation;
  cand.ramp_accel_ms2 = prof->ramp_accel_ms2;
  cand.merge_station_m = prof->merge_station_m;
  cand.merge_t_rel_s = t1 + prof->t2p_s;
  cand.trajectory = kinematics::ramp_free_trajectory(ctx.ramp_station_m, ctx.ramp_speed_kmh, ctx.v0_kmh,
                                                     prof->ramp_accel_ms2);
  cand.x_adjustment = *prof;
  cand.front_id = x_veh.id;
  cand.rear_id = y_veh.id;
  if (!verify(cand)) return std::nullopt;

  SelectionOutcome out;
  out.selection.front_id = x_veh.id;
  out.selection.rear_id = y_veh.id;
  out.selection.gap_length_m = x_veh.station_m - y_veh.station_m - kConst.vehicle_length_m;
  out.selection.mode = GapMode::kGapCreation;
  fill_sides(out.selection);
  out.plan = std::move(cand);
  return out;
}

inline std::optional<size_t> fleet_index(const std::vector<FleetVehicle>& fleet, int id) {
  for (size_t i = 0; i < fleet.size(); ++i)
    if (fleet[i].id == id) return i;
  return std::nullopt;
}

}  // namespace detail

// Target-gap choice around the conflict vehicle. Returns the first gap (near
// pair first, then alternating outward) that is long enough and admits a
// feasible merge; falls back to gap creation ahead of the conflict vehicle.
inline GapSelection select_target_gap(const ConflictReport& conflict, const std::vector<FleetVehicle>& fleet,
                                      const safety::MergeGapRequirement& req, const PlanContext& ctx_in,
                                      const Verifier& verify = accept_all) {
  PlanContext ctx = ctx_in;
  ctx.requirement = req;
  if (fleet.size() < 2) {
    GapSelection sel;  // synthetic unbounded gap
    sel.mode = GapMode::kDirectMerge;
    if (fleet.size() == 1) sel.rear_id = fleet[0].id;
    return sel;
  }
  const auto c_idx = detail::fleet_index(fleet, conflict.mainline_id);
  if (!c_idx) throw std::invalid_argument("select_target_gap: conflict vehicle not in fleet");
  if (auto out = detail::try_select(ctx, fleet, *c_idx, verify)) return out->selection;
  // Everything infeasible: report the gap-creation gap anyway so the caller
  // can see what was attempted before holding the vehicle.
  GapSelection sel;
  sel.mode = GapMode::kGapCreation;
  if (*c_idx > 0) sel.front_id = fleet[*c_idx - 1].id;
  sel.rear_id = fleet[*c_idx].id;
  sel.s_front_m = *c_idx > 0 ? fleet[*c_idx - 1].station_m - fleet[*c_idx].station_m - kConst.vehicle_length_m : kInf;
  sel.s_behind_m = *c_idx + 1 < fleet.size()
      ? fleet[*c_idx].station_m - fleet[*c_idx + 1].station_m - kConst.vehicle_length_m
      : kInf;
  sel.gap_length_m = sel.s_front_m;
  return sel;
}

// Full decision flow for one ramp vehicle against a fleet snapshot. The
// verifier lets the caller audit candidate trajectories against everything
// already committed; planning is deterministic for identical inputs.
inline PlanResult plan(const PlanContext& ctx, const std::vector<FleetVehicle>& fleet,
                       const Verifier& verify = accept_all) {
  const double v0_ms = units::kmh_to_ms(ctx.v0_kmh);
  const auto& req = ctx.requirement;

  const bool can_free_flow = ctx.ramp_speed_kmh > 0.0 && ctx.ramp_station_m < 0.0;
  std::optional<ConflictReport> conflict;
  if (can_free_flow) {
    VehicleState ramp;
    ramp.id = ctx.ramp_id;
    ramp.station_m = ctx.ramp_station_m;
    conflict = identify_conflict(ramp, fleet, ctx.v0_kmh, ctx.ramp_speed_kmh, ctx.default_ar_ms2);
    if (!conflict) {
      // Default-acceleration merge; admissible when both neighbor clearances
      // hold at the merge instant.
      const double t_m = ctx.t1_s() + kinematics::accel_phase_duration(ctx.ramp_speed_kmh, ctx.v0_kmh, ctx.default_ar_ms2);
      const double s_r = kinematics::merge_point(ctx.ramp_speed_kmh, ctx.v0_kmh, ctx.default_ar_ms2);
      bool clear = true;
      std::optional<size_t> nearest;
      double nearest_dist = kInf;
      for (size_t i = 0; i < fleet.size(); ++i) {
        const double s_m = fleet[i].station_m + v0_ms * t_m;
        const double d = std::abs(s_m - s_r);
        if (d < nearest_dist) {
          nearest_dist = d;
          nearest = i;
        }
        if (s_m >= s_r && s_m - s_r - kConst.vehicle_length_m < req.front_clearance_m) clear = false;
        if (s_m < s_r && s_r - s_m - kConst.vehicle_length_m < req.rear_clearance_m) clear = false;
      }
      if (clear) {
        CandidatePlan cand;
        cand.mode = GapMode::kDirectMerge;
        cand.ramp_accel_ms2 = ctx.default_ar_ms2;
        cand.merge_station_m = s_r;
        cand.merge_t_rel_s = t_m;
        cand.trajectory = kinematics::ramp_free_trajectory(ctx.ramp_station_m, ctx.ramp_speed_kmh, ctx.v0_kmh,
                                                           ctx.default_ar_ms2);
        if (accel_feasible(ctx.default_ar_ms2, ctx.v0_kmh, ctx.ramp_speed_kmh) && verify(cand))
          return FreeFlowPlan{ctx.default_ar_ms2, s_r, t_m, std::move(cand.trajectory)};
      }
      if (fleet.empty()) {
        // No traffic at all: free flow regardless of clearance bookkeeping.
        auto traj = kinematics::ramp_free_trajectory(ctx.ramp_station_m, ctx.ramp_speed_kmh, ctx.v0_kmh,
                                                     ctx.default_ar_ms2);
        return FreeFlowPlan{ctx.default_ar_ms2, s_r, t_m, std::move(traj)};
      }
      // No band conflict but a clearance fails (or the default acceleration
      // itself is out of range): treat the nearest projected vehicle as the
      // conflict for gap selection.
      const double s_m = fleet[*nearest].station_m + v0_ms * t_m;
      conflict = ConflictReport{ctx.ramp_id, fleet[*nearest].id, t_m, s_r, s_m};
    }
  }

  if (fleet.empty()) {
    if (ctx.ramp_speed_kmh > 0.0 && ctx.ramp_station_m < 0.0) {
      auto traj = kinematics::ramp_free_trajectory(ctx.ramp_station_m, ctx.ramp_speed_kmh, ctx.v0_kmh,
                                                   ctx.default_ar_ms2);
      const double t_m = ctx.t1_s() + kinematics::accel_phase_duration(ctx.ramp_speed_kmh, ctx.v0_kmh, ctx.default_ar_ms2);
      return FreeFlowPlan{ctx.default_ar_ms2, kinematics::merge_point(ctx.ramp_speed_kmh, ctx.v0_kmh, ctx.default_ar_ms2),
                          t_m, std::move(traj)};
    }
    // Held vehicle, empty mainline: launch at the strongest comfortable rate.
    const double a = std::min(kConst.max_accel_ms2, std::max(accel_lower_bound(ctx.v0_kmh, 0.0), 2.0));
    auto traj = kinematics::ramp_free_trajectory(0.0, 0.0, ctx.v0_kmh, a);
    const double t_m = kinematics::accel_phase_duration(0.0, ctx.v0_kmh, a);
    return FreeFlowPlan{a, kinematics::merge_point(0.0, ctx.v0_kmh, a), t_m, std::move(traj)};
  }

  std::optional<size_t> c_idx;
  if (conflict) {
    c_idx = detail::fleet_index(fleet, conflict->mainline_id);
  } else {
    // Held vehicle at the ramp end: anchor the search at the vehicle whose
    // projected position is nearest the reachable window.
    double best = kInf;
    for (size_t i = 0; i < fleet.size(); ++i) {
      const double d = std::abs(fleet[i].station_m);
      if (d < best) {
        best = d;
        c_idx = i;
      }
    }
  }
  if (!c_idx) return HoldPlan{};

  if (auto out = detail::try_select(ctx, fleet, *c_idx, verify); out && out->plan) {
    auto& cand = *out->plan;
    return MergePlan{cand.ramp_accel_ms2, cand.merge_station_m, cand.merge_t_rel_s, std::move(cand.trajectory),
                     std::move(cand.x_adjustment), std::move(out->selection)};
  }
  return HoldPlan{};
}

}  // namespace rampweave::planner
