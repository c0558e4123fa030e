#pragma once

#include <cmath>
#include <numbers>

namespace pctof {

/// Speed of light in vacuum [m/s], exact by SI definition.
inline constexpr double speed_of_light = 299792458.0;

inline constexpr double pi = std::numbers::pi_v<double>;
inline constexpr double two_pi = 2.0 * std::numbers::pi_v<double>;

/// Wraps an angle into [0, 2*pi).
inline double wrap_two_pi(double phi) {
  double r = std::fmod(phi, two_pi);
  if (r < 0.0) r += two_pi;
  // fmod of a value just below a multiple of 2*pi can round up to 2*pi.
  if (r >= two_pi) r = 0.0;
  return r;
}

/// Wraps an angle into (-pi, pi].
inline double wrap_pm_pi(double phi) {
  double r = std::remainder(phi, two_pi);
  if (r <= -pi) r = pi;  // remainder returns [-pi, pi]; fold the open end
  return r;
}

/// Signed circular distance from a to b, in (-pi, pi].
inline double circular_delta(double a, double b) { return wrap_pm_pi(b - a); }

}  // namespace pctof
