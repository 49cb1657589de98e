#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "rampweave/engine.hpp"
#include "rampweave/metrics_model.hpp"

namespace rampweave::metrics {

using metrics_model::FuelModelParams;
using metrics_model::fuel_rate;

// Extra travel time over the vehicle's free-flow reference, clamped at zero.
// Only defined for vehicles that exited the corridor.
inline std::optional<double> vehicle_delay(const engine::VehicleRecord& rec) {
  if (!rec.exited()) return std::nullopt;
  return std::max(0.0, (rec.exit_s - rec.entry_s) - rec.freeflow_s);
}

// Percentage delay reduction relative to a baseline. Undefined for a zero
// baseline.
inline std::optional<double> improvement_rate(double d_strategy_s, double d_baseline_s) {
  if (d_baseline_s <= 0.0) return std::nullopt;
  return (1.0 - d_strategy_s / d_baseline_s) * 100.0;
}

// Model-unit fuel total over the whole trace.
inline double integrate_fuel(const engine::SimulationTrace& trace, const FuelModelParams& params = {}) {
  double total = 0.0;
  const double dt = trace.config.dt_s;
  for (const auto& r : trace.records) total += fuel_rate(r.speed_ms, r.accel_ms2, params) * dt;
  return total;
}

struct SpeedSeries {
  // Mean instantaneous speed of present vehicles per 1-second bucket; buckets
  // with no vehicles are absent.
  std::map<long, double> mainline;
  std::map<long, double> ramp;
};

inline SpeedSeries speed_series(const engine::SimulationTrace& trace) {
  struct Acc {
    double sum = 0.0;
    long n = 0;
  };
  std::map<long, Acc> main_acc, ramp_acc;
  for (const auto& r : trace.records) {
    const long bucket = static_cast<long>(std::floor(r.t_s + 1e-9));
    auto& acc = (r.cls == VehicleClass::kMainline ? main_acc : ramp_acc)[bucket];
    acc.sum += r.speed_ms;
    ++acc.n;
  }
  SpeedSeries out;
  for (const auto& [b, a] : main_acc) out.mainline[b] = a.sum / a.n;
  for (const auto& [b, a] : ramp_acc) out.ramp[b] = a.sum / a.n;
  return out;
}

struct MetricsReport {
  double d_main_s = 0.0;  // average mainline delay
  double d_ramp_s = 0.0;  // average ramp delay
  long n_main = 0;        // exited vehicles counted
  long n_ramp = 0;
  double fuel_total = 0.0;
  std::optional<double> improvement_main_pct;
  std::optional<double> improvement_ramp_pct;
  std::optional<double> fuel_improvement_pct;
  SpeedSeries speeds;
};

// Per-class averages over vehicles that entered at or after the warm-up and
// exited before the end. Fuel totals cover the same vehicle set.
inline MetricsReport compute(const engine::SimulationTrace& trace,
                             const engine::SimulationTrace* baseline = nullptr) {
  MetricsReport rep;
  double sum_main = 0.0, sum_ramp = 0.0;
  const double warmup = trace.config.warmup_s;
  for (const auto& v : trace.vehicles) {
    if (v.entry_s < warmup) continue;
    const auto d = vehicle_delay(v);
    if (!d) continue;
    if (v.cls == VehicleClass::kMainline) {
      sum_main += *d;
      ++rep.n_main;
    } else {
      sum_ramp += *d;
      ++rep.n_ramp;
    }
    rep.fuel_total += v.fuel;
  }
  if (rep.n_main > 0) rep.d_main_s = sum_main / rep.n_main;
  if (rep.n_ramp > 0) rep.d_ramp_s = sum_ramp / rep.n_ramp;
  rep.speeds = speed_series(trace);
  if (baseline) {
    const MetricsReport base = compute(*baseline);
    rep.improvement_main_pct = improvement_rate(rep.d_main_s, base.d_main_s);
    rep.improvement_ramp_pct = improvement_rate(rep.d_ramp_s, base.d_ramp_s);
    if (base.fuel_total > 0.0) rep.fuel_improvement_pct = (1.0 - rep.fuel_total / base.fuel_total) * 100.0;
  }
  return rep;
}

}  // namespace rampweave::metrics
