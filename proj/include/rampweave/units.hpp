#pragma once

#include <cmath>
#include <stdexcept>

namespace rampweave {

namespace units {

inline double kmh_to_ms(double v_kmh) {
  if (v_kmh < 0.0) throw std::invalid_argument("kmh_to_ms: negative speed");
  return v_kmh / 3.6;
}

inline double ms_to_kmh(double v_ms) {
  if (v_ms < 0.0) throw std::invalid_argument("ms_to_kmh: negative speed");
  return v_ms * 3.6;
}

// Speed component of a merging vehicle along the mainline axis while it
// crosses the lane line at the fixed 30 degree inclination.
inline double merge_lateral_speed(double v0_kmh) {
  if (v0_kmh < 0.0) throw std::invalid_argument("merge_lateral_speed: negative speed");
  constexpr double kCos30 = 0.86602540378443864676;
  return v0_kmh * kCos30;
}

}  // namespace units

// Speed value with an explicit unit boundary. Internally always m/s; km/h
// only appears through the named conversions, so a raw double can never be
// constructed with the wrong unit by accident.
class Speed {
 public:
  static Speed from_ms(double v) { return Speed(checked(v, "Speed::from_ms")); }
  static Speed from_kmh(double v) { return Speed(checked(v, "Speed::from_kmh") / 3.6); }

  double ms() const { return ms_; }
  double kmh() const { return ms_ * 3.6; }

  friend bool operator==(const Speed&, const Speed&) = default;

 private:
  explicit Speed(double ms) : ms_(ms) {}
  static double checked(double v, const char* who) {
    if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": bad speed");
    return v;
  }
  double ms_ = 0.0;
};

}  // namespace rampweave
