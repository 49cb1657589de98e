#pragma once

#include <algorithm>

namespace rampweave::metrics_model {

// Polynomial fuel model coefficients. The vehicle parameters below the
// polynomial block are recorded for provenance; the rate formula does not
// consume them (the polynomial was evidently fit from them offline).
struct FuelModelParams {
  double p0 = 0.1569;
  double p1 = 0.0245;
  double p2 = -7.415e-4;
  double p3 = 5.975e-5;
  double q0 = 0.07224;
  double q1 = 0.09681;
  double q2 = 1.075e-3;

  double vehicle_mass_kg = 1200.0;
  double drag_coefficient = 0.32;
  double air_density_kgm3 = 1.184;
  double frontal_area_m2 = 2.5;
  double viscosity_coefficient = 0.015;
};

// Instantaneous fuel rate in model units per second. The acceleration term
// is zeroed while decelerating (energy recovery, no extra demand). Intended
// domain: v in [0, 30] m/s.
inline double fuel_rate(double v_ms, double a_ms2, const FuelModelParams& p = {}) {
  const double v = v_ms;
  const double idle = p.p0 + p.p1 * v + p.p2 * v * v + p.p3 * v * v * v;
  const double accel = std::max(a_ms2, 0.0) * (p.q0 + p.q1 * v + p.q2 * v * v);
  return idle + accel;
}

}  // namespace rampweave::metrics_model
