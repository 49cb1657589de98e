#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rampweave/baseline.hpp"
#include "rampweave/constants.hpp"
#include "rampweave/kinematics.hpp"
#include "rampweave/metrics_model.hpp"
#include "rampweave/planner.hpp"
#include "rampweave/rng.hpp"
#include "rampweave/risk.hpp"
#include "rampweave/safety.hpp"
#include "rampweave/units.hpp"
#include "rampweave/vehicle.hpp"

namespace rampweave::engine {

enum class Strategy { kBaseline, kMainlinePriority };

inline const char* to_string(Strategy s) {
  return s == Strategy::kBaseline ? "baseline" : "mainline_priority";
}

struct ScenarioConfig {
  double q_main_vph = 800.0;
  double q_ramp_vph = 200.0;
  double v0_kmh = 72.0;    // common mainline speed under mainline_priority
  double vR0_kmh = 61.2;   // ramp approach speed
  double default_ar_ms2 = 2.0;
  Strategy strategy = Strategy::kMainlinePriority;
  std::uint64_t seed = 1729;
  double duration_s = 600.0;
  double dt_s = 0.1;
  double warmup_s = 60.0;        // vehicles entering before this are excluded from metrics
  double min_headway_s = 1.5;
  double ramp_freeflow_s = 0.0;  // 0: duration of the analytic unimpeded profile

  // Baseline-only knobs. Mainline speeds are heterogeneous under the baseline
  // because the car-following comparison is meaningless without a speed
  // distribution; the cooperative math assumes the single common v0.
  double v0_min_kmh = 54.0;
  double v0_max_kmh = 72.0;
  double reaction_time_s = 1.0;
  double max_decel_ms2 = 4.5;
  double max_accel_ms2 = 2.6;

  double inject_fault_s = 0.0;  // testing hook: perturb a trajectory at this time
};

struct StepRecord {
  double t_s = 0.0;
  int id = 0;
  VehicleClass cls = VehicleClass::kMainline;
  double station_m = 0.0;
  double speed_ms = 0.0;
  double accel_ms2 = 0.0;
  double fuel_rate = 0.0;
};

struct Event {
  double t_s = 0.0;
  std::string kind;
  int id = 0;
  std::string detail;
};

struct VehicleRecord {
  int id = 0;
  VehicleClass cls = VehicleClass::kMainline;
  double entry_s = 0.0;
  double exit_s = -1.0;  // < 0: still present at duration end
  double freeflow_s = 0.0;
  double fuel = 0.0;

  bool exited() const { return exit_s >= 0.0; }
};

struct AuditViolation {
  double t_s = 0.0;
  int leader_id = 0;
  int follower_id = 0;
  double gap_m = 0.0;
  double required_m = 0.0;
};

struct SimulationTrace {
  ScenarioConfig config;
  std::vector<StepRecord> records;
  std::vector<Event> events;
  std::vector<VehicleRecord> vehicles;
  std::vector<AuditViolation> violations;
  int critical_flags = 0;
  int entered = 0;
  int exited = 0;
  int present_at_end = 0;
};

// Raised when the safety audit fails under mainline_priority: a planner bug,
// not a tolerable event.
class AuditAbort : public std::runtime_error {
 public:
  AuditAbort(const AuditViolation& v)
      : std::runtime_error("safety audit violation at t=" + std::to_string(v.t_s) + "s: pair (leader " +
                           std::to_string(v.leader_id) + ", follower " + std::to_string(v.follower_id) + ") gap " +
                           std::to_string(v.gap_m) + "m < required " + std::to_string(v.required_m) + "m"),
        violation(v) {}
  AuditViolation violation;
};

// Arrival times over [0, duration): shifted-exponential headways with the
// floor min_headway, preserving the demanded volume q (mean headway 3600/q).
// Identical seeds give identical lists on every platform.
inline std::vector<double> generate_arrivals(double q_vph, double duration_s, std::uint64_t seed,
                                             double min_headway_s) {
  std::vector<double> out;
  if (q_vph <= 0.0) return out;
  const double mean = 3600.0 / q_vph;
  const double exp_mean = std::max(mean - min_headway_s, 1e-9);
  Rng rng(seed);
  double t = 0.0;
  while (true) {
    t += min_headway_s + rng.exponential(exp_mean);
    if (t >= duration_s) break;
    out.push_back(t);
  }
  return out;
}

struct AuditResult {
  std::vector<AuditViolation> violations;
  int critical = 0;
};

// Check one lane's ordered states (furthest downstream first): every adjacent
// pair must keep at least the safe following distance, and closing pairs are
// additionally screened for critical conflict severity.
inline AuditResult audit_step(const std::vector<VehicleState>& lane, double t_s) {
  AuditResult r;
  for (size_t i = 0; i + 1 < lane.size(); ++i) {
    const auto& leader = lane[i];
    const auto& follower = lane[i + 1];
    const double gap = bumper_gap(leader, follower);
    const double required = safety::safe_following_distance(leader.speed_ms, follower.speed_ms).total_m;
    if (gap < required) r.violations.push_back({t_s, leader.id, follower.id, gap, required});
    if (follower.speed_ms > leader.speed_ms && gap > 0.0) {
      const auto sev = risk::assess(follower.speed_ms - leader.speed_ms, risk::MassRatio(0.0), follower.speed_ms,
                                    leader.speed_ms, gap);
      if (sev.critical) ++r.critical;
    }
  }
  return r;
}

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Accelerate from rest, then brake symmetrically, stopping exactly `dist`
// ahead. Used by queued ramp vehicles advancing to the ramp end.
inline PiecewiseTrajectory creep_trajectory(double station_m, double dist_m) {
  constexpr double kRate = 1.5;
  const double v_peak = std::sqrt(kRate * dist_m);
  const double half = v_peak / kRate;
  return PiecewiseTrajectory::make({{0.0, half, station_m, 0.0, kRate},
                                    {half, 2.0 * half, station_m + dist_m / 2.0, v_peak, -kRate},
                                    {2.0 * half, kInf, station_m + dist_m, 0.0, 0.0}});
}

// X's full trajectory for a gap-creation maneuver: constant v0 until the
// ramp vehicle reaches the ramp end, the symmetric speed adjustment, then
// constant v0 again.
inline PiecewiseTrajectory gap_creation_trajectory(double station_m, double v0_ms,
                                                   const planner::GapCreationProfile& prof) {
  const double t1 = prof.start_offset_s;
  const double s1 = station_m + v0_ms * t1;
  const double half = prof.t2p_s / 2.0;
  const double s_mid = s1 + v0_ms * half + 0.5 * prof.a_acc_ms2 * half * half;
  const double v_mid = v0_ms + prof.a_acc_ms2 * half;
  const double s_end = s_mid + v_mid * half - 0.5 * prof.a_acc_ms2 * half * half;
  std::vector<TrajectorySegment> segs;
  if (t1 > 0.0) segs.push_back({0.0, t1, station_m, v0_ms, 0.0});
  segs.push_back({t1, t1 + half, s1, v0_ms, prof.a_acc_ms2});
  segs.push_back({t1 + half, t1 + prof.t2p_s, s_mid, v_mid, -prof.a_acc_ms2});
  segs.push_back({t1 + prof.t2p_s, kInf, s_end, v0_ms, 0.0});
  return PiecewiseTrajectory::make(std::move(segs));
}

struct Agent {
  int id = 0;
  VehicleClass cls = VehicleClass::kMainline;
  double entry_t = 0.0;
  double freeflow_s = 0.0;
  double fuel = 0.0;

  // Trajectory execution (mainline_priority).
  std::optional<PiecewiseTrajectory> traj;
  double epoch_t = 0.0;                 // absolute time of the trajectory's t=0
  double merge_abs_t = 0.0;             // ramp: absolute merge time; mainline: entry
  bool merged = false;
  bool holding = false;                 // ramp vehicle without an accepted plan
  double busy_until = -1.0;             // gap-creation maneuver active until (abs)
  std::optional<double> exit_abs_t;     // absolute corridor-exit time, when known

  // Numeric state (baseline).
  double station_m = 0.0;
  double speed_ms = 0.0;
  double accel_ms2 = 0.0;
  double desired_ms = 20.0;
  bool on_mainline = false;

  // Last fuel accrual, so an exit inside a step can be compensated exactly.
  double last_rate = 0.0;
  double last_accrual_end = 0.0;

  PiecewiseTrajectory::Sample sample(double t) const { return traj->eval(std::max(t - epoch_t, 0.0)); }
};

}  // namespace detail

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg) : cfg_(cfg) {
    if (cfg.dt_s <= 0.0 || cfg.duration_s <= 0.0) throw std::invalid_argument("ScenarioConfig: dt and duration must be positive");
    if (cfg.vR0_kmh <= 0.0 || cfg.vR0_kmh >= cfg.v0_kmh) throw std::invalid_argument("ScenarioConfig: requires 0 < vR0 < v0");
  }

  SimulationTrace run() {
    trace_.config = cfg_;
    const double v0_ms = units::kmh_to_ms(cfg_.v0_kmh);
    const double v_rx = units::merge_lateral_speed(cfg_.v0_kmh);
    requirement_ = safety::min_merge_gap(v_rx, cfg_.v0_kmh, cfg_.v0_kmh);

    auto main_arrivals = generate_arrivals(cfg_.q_main_vph, cfg_.duration_s, Rng::derive(cfg_.seed, 1), cfg_.min_headway_s);
    auto ramp_arrivals = generate_arrivals(cfg_.q_ramp_vph, cfg_.duration_s, Rng::derive(cfg_.seed, 2), cfg_.min_headway_s);
    Rng speed_rng(Rng::derive(cfg_.seed, 3));
    std::vector<double> main_speeds(main_arrivals.size());
    for (auto& v : main_speeds)
      v = cfg_.strategy == Strategy::kBaseline
              ? speed_rng.uniform(units::kmh_to_ms(cfg_.v0_min_kmh), units::kmh_to_ms(cfg_.v0_max_kmh))
              : v0_ms;

    const double vR0_ms = units::kmh_to_ms(cfg_.vR0_kmh);
    const double ramp_ff = ramp_freeflow_time();

    size_t next_main = 0, next_ramp = 0;
    int next_id = 1;
    bool fault_done = false;
    const long nsteps = std::lround(cfg_.duration_s / cfg_.dt_s);

    for (long k = 0; k <= nsteps; ++k) {
      const double t = k * cfg_.dt_s;

      // Insert due arrivals (mainline first, then ramp; within a class in time order).
      while (next_main < main_arrivals.size() && main_arrivals[next_main] <= t) {
        const double ta = main_arrivals[next_main];
        spawn_mainline(next_id++, ta, main_speeds[next_main]);
        ++next_main;
      }
      while (next_ramp < ramp_arrivals.size() && ramp_arrivals[next_ramp] <= t) {
        const double ta = ramp_arrivals[next_ramp];
        spawn_ramp(next_id++, ta, vR0_ms, ramp_ff);
        ++next_ramp;
      }

      if (cfg_.strategy == Strategy::kMainlinePriority) {
        replan_holders(t);
        advance_trajectories(t);
      } else {
        advance_baseline(t);
      }

      if (cfg_.inject_fault_s > 0.0 && !fault_done && t >= cfg_.inject_fault_s) {
        inject_fault(t);
        fault_done = true;
      }

      process_exits(t);
      audit(t);
      record(t);
    }

    finalize();
    return std::move(trace_);
  }

 private:
  using Agent = detail::Agent;

  // ---- shared bookkeeping ----

  double ramp_freeflow_time() const {
    if (cfg_.ramp_freeflow_s > 0.0) return cfg_.ramp_freeflow_s;
    const double t1 = kinematics::ramp_phase_duration(kGeometry.ramp_start_m, cfg_.vR0_kmh);
    const double t2 = kinematics::accel_phase_duration(cfg_.vR0_kmh, cfg_.v0_kmh, cfg_.default_ar_ms2);
    const double s_merge = kinematics::merge_point(cfg_.vR0_kmh, cfg_.v0_kmh, cfg_.default_ar_ms2);
    return t1 + t2 + (kGeometry.corridor_end_m - s_merge) / units::kmh_to_ms(cfg_.v0_kmh);
  }

  void spawn_mainline(int id, double ta, double speed_ms) {
    Agent a;
    a.id = id;
    a.cls = VehicleClass::kMainline;
    a.entry_t = ta;
    a.freeflow_s = kGeometry.corridor_length_m() / speed_ms;
    a.on_mainline = true;
    a.merged = true;
    a.merge_abs_t = ta;
    if (cfg_.strategy == Strategy::kMainlinePriority) {
      a.traj = kinematics::mainline_trajectory(kGeometry.corridor_begin_m, units::ms_to_kmh(speed_ms));
      a.epoch_t = ta;
      a.exit_abs_t = ta + *a.traj->time_at_station(kGeometry.corridor_end_m);
    } else {
      a.station_m = kGeometry.corridor_begin_m;
      a.speed_ms = speed_ms;
      a.desired_ms = speed_ms;
      if (!pending_main_.empty() || baseline_entry_blocked(a)) {
        pending_main_.push_back(a);
        event(ta, "entry_deferred", id, "mainline entry blocked");
        ++trace_.entered;
        return;
      }
    }
    agents_.push_back(std::move(a));
    ++trace_.entered;
    event(ta, "arrival", id, "mainline");
  }

  void spawn_ramp(int id, double ta, double vR0_ms, double ramp_ff) {
    Agent a;
    a.id = id;
    a.cls = VehicleClass::kRamp;
    a.entry_t = ta;
    a.freeflow_s = ramp_ff;
    a.on_mainline = false;
    if (cfg_.strategy == Strategy::kMainlinePriority) {
      a.epoch_t = ta;
      plan_ramp(a, ta);
    } else {
      a.station_m = kGeometry.ramp_start_m;
      a.speed_ms = vR0_ms;
      a.desired_ms = vR0_ms;
      if (!pending_ramp_.empty() || baseline_entry_blocked(a)) {
        pending_ramp_.push_back(a);
        event(ta, "entry_deferred", id, "ramp entry blocked");
        ++trace_.entered;
        return;
      }
    }
    agents_.push_back(std::move(a));
    ++trace_.entered;
    event(ta, "arrival", id, "ramp");
  }

  void event(double t, const char* kind, int id, std::string detail) {
    trace_.events.push_back({t, kind, id, std::move(detail)});
  }

  // ---- mainline_priority ----

  std::vector<planner::FleetVehicle> fleet_snapshot(double t, int exclude_id) const {
    std::vector<planner::FleetVehicle> fleet;
    for (const auto& a : agents_) {
      if (a.id == exclude_id || a.entry_t > t) continue;
      if (a.exit_abs_t && *a.exit_abs_t <= t) continue;
      if (!a.traj) continue;
      if (a.on_mainline || a.merged) {
        fleet.push_back({a.id, a.sample(t).station_m, a.busy_until < t});
      } else if (!a.holding) {
        // Planned but unmerged ramp vehicle: occupy its future slot by
        // backcasting its post-merge constant-v0 line to now.
        const double x_virtual = a.sample(a.merge_abs_t).station_m -
                                 units::kmh_to_ms(cfg_.v0_kmh) * (a.merge_abs_t - t);
        fleet.push_back({a.id, x_virtual, false});
      }
    }
    std::sort(fleet.begin(), fleet.end(),
              [](const auto& l, const auto& r) { return l.station_m > r.station_m; });
    return fleet;
  }

  // Grid audit of a candidate against everything already committed.
  bool verify_candidate(double t_p, int ramp_id, const planner::CandidatePlan& cand) const {
    const double v0_ms = units::kmh_to_ms(cfg_.v0_kmh);
    std::optional<PiecewiseTrajectory> x_traj;
    std::optional<double> x_exit;
    int x_id = -1;
    double horizon = cand.merge_t_rel_s + 5.0;
    if (cand.x_adjustment) {
      x_id = cand.x_adjustment->vehicle_id;
      const Agent* x = find_agent(x_id);
      if (!x) return false;
      x_traj = detail::gap_creation_trajectory(x->sample(t_p).station_m, v0_ms, *cand.x_adjustment);
      x_exit = x_traj->time_at_station(kGeometry.corridor_end_m);
      horizon = std::max(horizon, cand.x_adjustment->start_offset_s + cand.x_adjustment->t2p_s + 5.0);
    }
    for (const auto& a : agents_) horizon = std::max(horizon, a.busy_until - t_p + 2.0);
    horizon = std::min(horizon, 180.0);

    struct Entry {
      double station, speed;
      int id;
    };
    std::vector<Entry> main_lane, ramp_lane;
    for (double rel = 0.0; rel <= horizon; rel += cfg_.dt_s) {
      const double t = t_p + rel;
      main_lane.clear();
      ramp_lane.clear();
      {
        const auto s = cand.trajectory.eval(rel);
        (rel < cand.merge_t_rel_s ? ramp_lane : main_lane).push_back({s.station_m, s.speed_ms, ramp_id});
      }
      for (const auto& a : agents_) {
        if (a.id == ramp_id || a.entry_t > t || !a.traj) continue;
        if (a.id == x_id) {
          if (x_exit && t_p + *x_exit <= t) continue;
          const auto s = x_traj->eval(rel);
          main_lane.push_back({s.station_m, s.speed_ms, a.id});
          continue;
        }
        if (a.exit_abs_t && *a.exit_abs_t <= t) continue;
        const auto s = a.sample(t);
        const bool on_main = a.on_mainline || a.merged || a.merge_abs_t <= t;
        (on_main ? main_lane : ramp_lane).push_back({s.station_m, s.speed_ms, a.id});
      }
      for (auto* lane : {&main_lane, &ramp_lane}) {
        std::sort(lane->begin(), lane->end(), [](const Entry& l, const Entry& r) { return l.station > r.station; });
        for (size_t i = 0; i + 1 < lane->size(); ++i) {
          const double gap = (*lane)[i].station - (*lane)[i + 1].station - kConst.vehicle_length_m;
          const double need = safety::safe_following_distance((*lane)[i].speed, (*lane)[i + 1].speed).total_m;
          if (gap < need) return false;
        }
      }
    }
    return true;
  }

  void plan_ramp(Agent& a, double t_p) {
    planner::PlanContext ctx;
    ctx.ramp_id = a.id;
    ctx.ramp_station_m = a.traj ? a.sample(t_p).station_m : kGeometry.ramp_start_m;
    ctx.ramp_speed_kmh = a.traj ? units::ms_to_kmh(a.sample(t_p).speed_ms) : cfg_.vR0_kmh;
    ctx.v0_kmh = cfg_.v0_kmh;
    ctx.default_ar_ms2 = cfg_.default_ar_ms2;
    ctx.requirement = requirement_;

    auto fleet = fleet_snapshot(t_p, a.id);
    auto verifier = [&](const planner::CandidatePlan& c) { return verify_candidate(t_p, a.id, c); };
    auto result = planner::plan(ctx, fleet, verifier);

    if (auto* ff = std::get_if<planner::FreeFlowPlan>(&result)) {
      a.traj = std::move(ff->trajectory);
      a.epoch_t = t_p;
      a.holding = false;
      a.merge_abs_t = t_p + ff->merge_t_rel_s;
      a.exit_abs_t = t_p + *a.traj->time_at_station(kGeometry.corridor_end_m);
      event(t_p, "plan_freeflow", a.id,
            "a_r=" + std::to_string(ff->ramp_accel_ms2) + ";merge_station=" + std::to_string(ff->merge_station_m));
      return;
    }
    if (auto* mp = std::get_if<planner::MergePlan>(&result)) {
      a.traj = std::move(mp->trajectory);
      a.epoch_t = t_p;
      a.holding = false;
      a.merge_abs_t = t_p + mp->merge_t_rel_s;
      a.exit_abs_t = t_p + *a.traj->time_at_station(kGeometry.corridor_end_m);
      if (mp->x_adjustment) {
        Agent* x = find_agent(mp->x_adjustment->vehicle_id);
        const double v0_ms = units::kmh_to_ms(cfg_.v0_kmh);
        x->traj = detail::gap_creation_trajectory(x->sample(t_p).station_m, v0_ms, *mp->x_adjustment);
        x->epoch_t = t_p;
        x->busy_until = t_p + mp->x_adjustment->start_offset_s + mp->x_adjustment->t2p_s;
        x->exit_abs_t = t_p + *x->traj->time_at_station(kGeometry.corridor_end_m);
        event(t_p, "plan_gapcreate", a.id,
              "x_id=" + std::to_string(x->id) + ";delta_l=" + std::to_string(mp->x_adjustment->delta_l_m) +
                  ";a_r=" + std::to_string(mp->ramp_accel_ms2) + ";merge_station=" + std::to_string(mp->merge_station_m));
      } else {
        event(t_p, "plan_direct", a.id,
              "a_r=" + std::to_string(mp->ramp_accel_ms2) + ";merge_station=" + std::to_string(mp->merge_station_m));
      }
      return;
    }

    // Hold: brake to a stop before the ramp end (or behind the holding queue)
    // and replan once stopped at the head of the queue.
    hold_agent(a, t_p);
  }

  void hold_agent(Agent& a, double t_p) {
    double stop_target = kGeometry.ramp_end_m;
    for (const auto& other : agents_) {
      if (other.id == a.id || !other.holding || !other.traj) continue;
      const double other_stop = other.traj->segments().back().station_m;
      stop_target = std::min(stop_target, other_stop - kConst.vehicle_length_m - 0.5);
    }
    const double station = a.traj ? a.sample(t_p).station_m : kGeometry.ramp_start_m;
    const double speed = a.traj ? a.sample(t_p).speed_ms : units::kmh_to_ms(cfg_.vR0_kmh);
    a.traj = kinematics::stop_at_trajectory(station, speed, stop_target);
    a.epoch_t = t_p;
    a.holding = true;
    a.merge_abs_t = detail::kInf;
    a.exit_abs_t.reset();
    event(t_p, "plan_hold", a.id, "stop_target=" + std::to_string(stop_target));
  }

  void replan_holders(double t) {
    // Once per second, let the frontmost stopped holder creep up or replan.
    const double phase = std::fmod(t, 1.0);
    if (phase > cfg_.dt_s / 2.0 && phase < 1.0 - cfg_.dt_s / 2.0) return;
    Agent* head = nullptr;
    double best = -detail::kInf;
    for (auto& a : agents_) {
      if (!a.holding || a.entry_t > t) continue;
      const double s = a.sample(t).station_m;
      if (s > best) {
        best = s;
        head = &a;
      }
    }
    if (!head) return;
    const auto s = head->sample(t);
    if (s.speed_ms > 1e-9) return;  // still braking
    if (s.station_m < kGeometry.ramp_end_m - 0.25) {
      // Not at the ramp end yet: advance to it, then replan on a later tick.
      head->traj = detail::creep_trajectory(s.station_m, kGeometry.ramp_end_m - s.station_m);
      head->epoch_t = t;
      event(t, "queue_advance", head->id, "to_ramp_end");
      return;
    }
    planner::PlanContext ctx;
    ctx.ramp_id = head->id;
    ctx.ramp_station_m = 0.0;
    ctx.ramp_speed_kmh = 0.0;
    ctx.v0_kmh = cfg_.v0_kmh;
    ctx.default_ar_ms2 = cfg_.default_ar_ms2;
    ctx.requirement = requirement_;
    auto fleet = fleet_snapshot(t, head->id);
    auto verifier = [&](const planner::CandidatePlan& c) { return verify_candidate(t, head->id, c); };
    auto result = planner::plan(ctx, fleet, verifier);
    if (auto* mp = std::get_if<planner::MergePlan>(&result)) {
      head->traj = std::move(mp->trajectory);
      head->epoch_t = t;
      head->holding = false;
      head->merge_abs_t = t + mp->merge_t_rel_s;
      head->exit_abs_t = t + *head->traj->time_at_station(kGeometry.corridor_end_m);
      event(t, "plan_direct", head->id,
            "a_r=" + std::to_string(mp->ramp_accel_ms2) + ";merge_station=" + std::to_string(mp->merge_station_m) +
                ";after_hold");
    } else if (auto* ff = std::get_if<planner::FreeFlowPlan>(&result)) {
      head->traj = std::move(ff->trajectory);
      head->epoch_t = t;
      head->holding = false;
      head->merge_abs_t = t + ff->merge_t_rel_s;
      head->exit_abs_t = t + *head->traj->time_at_station(kGeometry.corridor_end_m);
      event(t, "plan_freeflow", head->id, "after_hold");
    }
  }

  void advance_trajectories(double t) {
    for (auto& a : agents_) {
      if (a.entry_t > t || a.merged || a.cls != VehicleClass::kRamp) continue;
      if (!a.holding && a.merge_abs_t <= t) {
        a.merged = true;
        const double s = a.sample(a.merge_abs_t).station_m;
        event(a.merge_abs_t, "merge", a.id, "station=" + std::to_string(s));
      }
    }
  }

  // ---- baseline ----

  bool baseline_entry_blocked(const Agent& a) const {
    const Agent* tail = nullptr;
    for (const auto& o : agents_) {
      if (o.exit_abs_t) continue;
      const bool same_lane = a.cls == VehicleClass::kMainline ? o.on_mainline : !o.on_mainline;
      if (!same_lane) continue;
      if (!tail || o.station_m < tail->station_m) tail = &o;
    }
    if (!tail) return false;
    const double entry = a.cls == VehicleClass::kMainline ? kGeometry.corridor_begin_m : kGeometry.ramp_start_m;
    return tail->station_m - entry - kConst.vehicle_length_m < a.desired_ms * 1.0;
  }

  void admit_pending(double t) {
    // FIFO per lane: the queue head enters as soon as the entry is clear; its
    // clock (entry_t) keeps running from the scheduled arrival.
    auto admit = [&](std::vector<Agent>& pending) {
      while (!pending.empty() && !baseline_entry_blocked(pending.front())) {
        agents_.push_back(pending.front());
        event(t, "arrival", pending.front().id,
              pending.front().cls == VehicleClass::kMainline ? "mainline;deferred" : "ramp;deferred");
        pending.erase(pending.begin());
      }
    };
    admit(pending_main_);
    admit(pending_ramp_);
  }

  void advance_baseline(double t) {
    admit_pending(t);

    // Sorted views per lane, downstream first.
    auto order = lane_order(t);
    baseline::FollowerParams base;
    base.reaction_time_s = cfg_.reaction_time_s;
    base.max_decel_ms2 = cfg_.max_decel_ms2;
    base.max_accel_ms2 = cfg_.max_accel_ms2;

    std::vector<double> new_speed(agents_.size());
    std::vector<int> merging;
    for (size_t lane = 0; lane < 2; ++lane) {
      const auto& ids = lane == 0 ? order.main : order.ramp;
      for (size_t i = 0; i < ids.size(); ++i) {
        Agent& self = agents_[ids[i]];
        std::optional<VehicleState> leader;
        if (i > 0) {
          const Agent& l = agents_[ids[i - 1]];
          leader = VehicleState{l.id, l.cls, l.station_m, l.speed_ms, l.accel_ms2};
        }
        baseline::FollowerParams p = base;
        p.desired_speed_ms = self.desired_ms;
        double v = baseline::follow_step(make_state(self), leader, p, cfg_.dt_s);
        if (lane == 1) {
          // Virtual stop line: an unmerged vehicle must be able to stop
          // before the end of the acceleration lane.
          VehicleState stop_line{-1, VehicleClass::kMainline, kGeometry.accel_lane_end_m + kConst.vehicle_length_m - 1.0,
                                 0.0, 0.0};
          v = std::min(v, baseline::follow_step(make_state(self), stop_line, p, cfg_.dt_s));
        }
        new_speed[ids[i]] = v;
      }
    }
    for (size_t lane = 0; lane < 2; ++lane) {
      const auto& ids = lane == 0 ? order.main : order.ramp;
      for (size_t idx : ids) {
        Agent& a = agents_[idx];
        a.accel_ms2 = (new_speed[idx] - a.speed_ms) / cfg_.dt_s;
        a.speed_ms = new_speed[idx];
        a.station_m += a.speed_ms * cfg_.dt_s;
      }
    }

    // Merge attempts on the acceleration lane. Neighbors are rescanned after
    // every acceptance so two vehicles cannot take the same gap in one step.
    order = lane_order(t);
    for (size_t idx : order.ramp) {
      Agent& a = agents_[idx];
      if (a.station_m < kGeometry.accel_lane_begin_m || a.station_m >= kGeometry.accel_lane_end_m) continue;
      std::optional<VehicleState> front, rear;
      for (const Agent& m : agents_) {
        if (!m.on_mainline || m.entry_t > t || m.exit_abs_t) continue;
        if (m.station_m >= a.station_m) {
          if (!front || m.station_m < front->station_m)
            front = VehicleState{m.id, m.cls, m.station_m, m.speed_ms, m.accel_ms2};
        } else if (!rear || m.station_m > rear->station_m) {
          rear = VehicleState{m.id, m.cls, m.station_m, m.speed_ms, m.accel_ms2};
        }
      }
      const double v_rx = units::merge_lateral_speed(units::ms_to_kmh(a.speed_ms));
      const auto req = safety::min_merge_gap(v_rx, front ? units::ms_to_kmh(front->speed_ms) : cfg_.v0_kmh,
                                             rear ? units::ms_to_kmh(rear->speed_ms) : cfg_.v0_kmh);
      if (baseline::try_merge(make_state(a), front, rear, req)) {
        a.on_mainline = true;
        a.merged = true;
        a.merge_abs_t = t;
        a.desired_ms = units::kmh_to_ms(cfg_.v0_kmh);
        event(t, "merge", a.id, "station=" + std::to_string(a.station_m));
      }
    }
  }

  // ---- audit / records / exits ----

  struct LaneOrder {
    std::vector<size_t> main, ramp;
  };

  LaneOrder lane_order(double t) const {
    LaneOrder o;
    for (size_t i = 0; i < agents_.size(); ++i) {
      const Agent& a = agents_[i];
      if (a.entry_t > t || (a.exit_abs_t && *a.exit_abs_t <= t)) continue;
      const bool on_main = cfg_.strategy == Strategy::kMainlinePriority
                               ? (a.cls == VehicleClass::kMainline || (a.merged && a.merge_abs_t <= t))
                               : a.on_mainline;
      (on_main ? o.main : o.ramp).push_back(i);
    }
    auto key = [&](size_t i) {
      return cfg_.strategy == Strategy::kMainlinePriority ? agents_[i].sample(t).station_m : agents_[i].station_m;
    };
    auto cmp = [&](size_t l, size_t r) { return key(l) > key(r); };
    std::sort(o.main.begin(), o.main.end(), cmp);
    std::sort(o.ramp.begin(), o.ramp.end(), cmp);
    return o;
  }

  VehicleState make_state(const Agent& a) const {
    return VehicleState{a.id, a.cls, a.station_m, a.speed_ms, a.accel_ms2};
  }

  VehicleState state_at(const Agent& a, double t) const {
    if (cfg_.strategy == Strategy::kMainlinePriority) {
      const auto s = a.sample(t);
      return VehicleState{a.id, a.cls, s.station_m, s.speed_ms, s.accel_ms2};
    }
    return make_state(a);
  }

  void audit(double t) {
    const auto order = lane_order(t);
    for (const auto* ids : {&order.main, &order.ramp}) {
      std::vector<VehicleState> lane;
      lane.reserve(ids->size());
      for (size_t i : *ids) lane.push_back(state_at(agents_[i], t));
      auto res = audit_step(lane, t);
      trace_.critical_flags += res.critical;
      for (auto& v : res.violations) {
        trace_.violations.push_back(v);
        event(t, "audit_violation", v.follower_id,
              "leader=" + std::to_string(v.leader_id) + ";gap=" + std::to_string(v.gap_m) +
                  ";required=" + std::to_string(v.required_m));
        if (cfg_.strategy == Strategy::kMainlinePriority) throw AuditAbort(v);
      }
    }
  }

  void record(double t) {
    for (auto& a : agents_) {
      if (a.entry_t > t || (a.exit_abs_t && *a.exit_abs_t <= t)) continue;
      const auto st = state_at(a, t);
      const double rate = metrics_model::fuel_rate(st.speed_ms, st.accel_ms2, metrics_model::FuelModelParams{});
      trace_.records.push_back({t, a.id, a.cls, st.station_m, st.speed_ms, st.accel_ms2, rate});
      // Fuel accrues over the exact overlap of [t, t+dt) with the vehicle's
      // presence so refinement converges on the analytic integral.
      const double t_end = std::min({t + cfg_.dt_s, a.exit_abs_t.value_or(detail::kInf), cfg_.duration_s});
      a.fuel += rate * std::max(t_end - t, 0.0);
      if (t - cfg_.dt_s < a.entry_t && t > a.entry_t) a.fuel += rate * std::min(t - a.entry_t, cfg_.dt_s);
    }
  }

  void process_exits(double t) {
    if (cfg_.strategy == Strategy::kMainlinePriority) {
      for (auto& a : agents_) {
        if (a.entry_t > t || a.exit_abs_t || !a.traj) continue;
        if (auto cross = a.traj->time_at_station(kGeometry.corridor_end_m)) {
          const double abs_cross = a.epoch_t + *cross;
          if (abs_cross <= t) {
            a.exit_abs_t = abs_cross;
            event(abs_cross, "exit", a.id, "");
          }
        }
      }
    } else {
      for (auto& a : agents_) {
        if (a.entry_t > t || a.exit_abs_t) continue;
        if (a.station_m >= kGeometry.corridor_end_m) {
          const double overshoot = a.station_m - kGeometry.corridor_end_m;
          const double back = a.speed_ms > 1e-9 ? overshoot / a.speed_ms : 0.0;
          a.exit_abs_t = t - std::min(back, cfg_.dt_s);
          event(*a.exit_abs_t, "exit", a.id, "");
        }
      }
    }
  }

  void finalize() {
    std::sort(trace_.records.begin(), trace_.records.end(), [](const StepRecord& l, const StepRecord& r) {
      return l.t_s != r.t_s ? l.t_s < r.t_s : l.id < r.id;
    });
    for (const auto& a : agents_) {
      VehicleRecord rec;
      rec.id = a.id;
      rec.cls = a.cls;
      rec.entry_s = a.entry_t;
      rec.exit_s = a.exit_abs_t.value_or(-1.0);
      rec.freeflow_s = a.freeflow_s;
      rec.fuel = a.fuel;
      trace_.vehicles.push_back(rec);
      if (rec.exited())
        ++trace_.exited;
      else
        ++trace_.present_at_end;
    }
    // Vehicles deferred at the entry and never admitted still count as present.
    trace_.present_at_end += static_cast<int>(pending_main_.size() + pending_ramp_.size());
    std::sort(trace_.vehicles.begin(), trace_.vehicles.end(),
              [](const VehicleRecord& l, const VehicleRecord& r) { return l.id < r.id; });
  }

  void inject_fault(double t) {
    const auto order = lane_order(t);
    if (order.main.size() < 2) return;
    Agent& leader = agents_[order.main[0]];
    Agent& follower = agents_[order.main[1]];
    if (cfg_.strategy == Strategy::kMainlinePriority) {
      const double target = state_at(leader, t).station_m - kConst.vehicle_length_m - 0.001;
      follower.traj = kinematics::mainline_trajectory(target, cfg_.v0_kmh);
      follower.epoch_t = t;
    } else {
      follower.station_m = leader.station_m - kConst.vehicle_length_m - 0.001;
    }
    event(t, "fault_injected", follower.id, "teleported behind leader " + std::to_string(leader.id));
  }

  const Agent* find_agent(int id) const {
    for (const auto& a : agents_) {
      if (a.id == id) return &a;
    }
    return nullptr;
  }
  Agent* find_agent(int id) { return const_cast<Agent*>(std::as_const(*this).find_agent(id)); }

  ScenarioConfig cfg_;
  SimulationTrace trace_;
  safety::MergeGapRequirement requirement_;
  std::vector<Agent> agents_;
  std::vector<Agent> pending_main_, pending_ramp_;
};

inline SimulationTrace run(const ScenarioConfig& cfg) { return Simulation(cfg).run(); }

}  // namespace rampweave::engine
