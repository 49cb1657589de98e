#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rampweave/constants.hpp"

namespace rampweave::risk {

// Mass ratio k = m1/m2 of a colliding pair, carried as p = log10(k).
class MassRatio {
 public:
  explicit MassRatio(double p) : p_(p) {
    if (p < -3.0 || p > 3.0) throw std::invalid_argument("MassRatio: p outside [-3, 3]");
  }
  double p() const { return p_; }
  double k() const { return std::pow(10.0, p_); }

 private:
  double p_;
};

struct SeverityAssessment {
  double collision_accel_ms2 = 0.0;  // a
  double urgent_accel_ms2 = 0.0;     // a_p
  double severity = 0.0;             // J = a * a_p, m^2/s^4
  bool critical = false;             // J at or above (0.3g)^2
};

// Average deceleration of the initially uniform vehicle over a perfectly
// inelastic impact of fixed duration. dv in m/s, valid up to a 100 m/s
// head-on closing speed.
inline double collision_acceleration(double dv_ms, const MassRatio& ratio) {
  if (dv_ms < 0.0 || dv_ms > 100.0) throw std::invalid_argument("collision_acceleration: dv outside [0, 100]");
  return 5.0 * dv_ms / (1.0 + std::pow(10.0, ratio.p()));
}

// Deceleration the faster vehicle needs to match speeds within the current
// spacing. Only defined for a closing pair.
inline double urgent_acceleration(double v_fast_ms, double v_slow_ms, double spacing_m) {
  if (spacing_m <= 0.0) throw std::invalid_argument("urgent_acceleration: spacing must be positive");
  if (v_slow_ms < 0.0 || v_fast_ms < v_slow_ms) throw std::invalid_argument("urgent_acceleration: pair is not closing");
  return (v_fast_ms * v_fast_ms - v_slow_ms * v_slow_ms) / (2.0 * spacing_m);
}

// Product severity with the critical-comfort threshold. The boundary is
// inclusive; the 1e-9 guard keeps the decimal rendering of (0.3g)^2 on the
// critical side of the machine rounding.
inline SeverityAssessment assess(double dv_ms, const MassRatio& ratio, double v_fast_ms, double v_slow_ms,
                                 double spacing_m) {
  SeverityAssessment out;
  out.collision_accel_ms2 = collision_acceleration(dv_ms, ratio);
  out.urgent_accel_ms2 = urgent_acceleration(v_fast_ms, v_slow_ms, spacing_m);
  out.severity = out.collision_accel_ms2 * out.urgent_accel_ms2;
  out.critical = out.severity >= kConst.severity_critical() - 1e-9;
  return out;
}

// Batch evaluation over a (dv, p) grid, row-major with dv as the outer axis.
inline std::vector<double> collision_accel_surface(const std::vector<double>& dv_grid,
                                                   const std::vector<double>& p_grid) {
  if (dv_grid.empty() || p_grid.empty()) throw std::invalid_argument("collision_accel_surface: empty grid");
  std::vector<double> out;
  out.reserve(dv_grid.size() * p_grid.size());
  for (double dv : dv_grid)
    for (double p : p_grid) out.push_back(collision_acceleration(dv, MassRatio(p)));
  return out;
}

}  // namespace rampweave::risk
