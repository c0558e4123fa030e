#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "pctof/constants.hpp"
#include "pctof/erf.hpp"
#include "pctof/errors.hpp"

namespace pctof {

enum class ModulationKind { GaussianPulseTrain, Sinusoid };
enum class DemodulationKind { SmoothedRect, Sinusoid };

/// Normalization of the emitted modulation signal.
///
/// UnitAmplitude: the effective pulse, i.e. the Gaussian of width
/// sigma_eff = sqrt(sigma_m^2 + sigma_d^2) that remains after the pulse is
/// smeared by the demodulation edge, has peak value 1. For sigma_d = 0 this
/// is literally a unit-amplitude pulse train. The correlation plateau is
/// then sigma_eff * sqrt(2*pi) / omega.
///
/// UnitAveragePower: the pulse train is scaled so its mean over one period
/// is 1/2, the same average power as the sinusoid (1 + cos)/2. Used for
/// fair cross-coding comparisons.
enum class AmplitudeConvention { UnitAmplitude, UnitAveragePower };

/// Emitted light waveform: a periodic pulse train (Dirac comb convolved
/// with a Gaussian of standard deviation sigma_m, in phase radians) or a
/// raised cosine.
struct ModulationSpec {
  ModulationKind kind = ModulationKind::GaussianPulseTrain;
  double sigma_m = 0.0;  // pulse width [rad]; ignored for Sinusoid
  AmplitudeConvention convention = AmplitudeConvention::UnitAmplitude;
};

/// Sensor demodulation gain: a duty-0.5 rectangle (width pi per 2*pi
/// period) convolved with a unit-area Gaussian edge kernel of standard
/// deviation sigma_d, or a raised cosine. Gain is in [0, 1].
struct DemodulationSpec {
  DemodulationKind kind = DemodulationKind::SmoothedRect;
  double sigma_d = 0.0;  // edge width [rad]; ignored for Sinusoid
};

/// Full coding of one acquisition: modulation frequency, tap layout and the
/// modulation/demodulation signal pair. Tap i demodulates with the base
/// waveform delayed by theta_i = theta_g + 2*pi*i/K, so the correlation of
/// tap i is the base correlation evaluated at phi_gamma - theta_i.
struct CodingConfig {
  double nu = 0.0;       // modulation frequency [Hz]
  int k_taps = 4;
  double theta_g = 0.0;  // global demodulation shift [rad], in [0, 2*pi)
  ModulationSpec modulation;
  DemodulationSpec demodulation;

  double omega() const { return two_pi * nu; }
  double unambiguity_range() const { return speed_of_light / (2.0 * nu); }

  bool is_pulsed() const {
    return modulation.kind == ModulationKind::GaussianPulseTrain &&
           demodulation.kind == DemodulationKind::SmoothedRect;
  }
  bool is_sinusoid() const {
    return modulation.kind == ModulationKind::Sinusoid &&
           demodulation.kind == DemodulationKind::Sinusoid;
  }

  /// Combined Gaussian width of pulse and demodulation edge [rad].
  double sigma_eff() const {
    return std::sqrt(modulation.sigma_m * modulation.sigma_m +
                     demodulation.sigma_d * demodulation.sigma_d);
  }

  /// Duration of one correlation edge transition [s].
  double rise_time() const { return 4.0 * sigma_eff() / omega(); }

  double tap_shift(int tap) const {
    return wrap_two_pi(theta_g + two_pi * static_cast<double>(tap) /
                                     static_cast<double>(k_taps));
  }

  void validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu))
      throw DomainError("CodingConfig: frequency must be positive and finite");
    if (k_taps < 3) throw DomainError("CodingConfig: need at least 3 taps");
    if (!std::isfinite(theta_g))
      throw DomainError("CodingConfig: non-finite global shift");
    if (is_pulsed()) {
      const double sm = modulation.sigma_m;
      const double sd = demodulation.sigma_d;
      if (!(sm > 0.0) || !std::isfinite(sm))
        throw DomainError("CodingConfig: pulse width must be positive");
      if (!(sd >= 0.0) || !std::isfinite(sd))
        throw DomainError("CodingConfig: edge width must be non-negative");
      if (6.0 * sm >= two_pi)
        throw ModelValidityError("CodingConfig: pulse too wide, 6*sigma_m >= 2*pi");
      if (6.0 * sigma_eff() >= two_pi)
        throw ModelValidityError("CodingConfig: combined width too large, 6*sigma >= 2*pi");
    } else if (!is_sinusoid()) {
      throw UnsupportedCodingError(
          "CodingConfig: modulation/demodulation kinds must pair as "
          "pulse+rect or sinusoid+sinusoid");
    }
  }

  /// True when two configs describe the same signal pair (the global shift
  /// is an acquisition setting and deliberately excluded).
  bool same_signal_family(const CodingConfig& o) const {
    return nu == o.nu && k_taps == o.k_taps &&
           modulation.kind == o.modulation.kind &&
           modulation.sigma_m == o.modulation.sigma_m &&
           modulation.convention == o.modulation.convention &&
           demodulation.kind == o.demodulation.kind &&
           demodulation.sigma_d == o.demodulation.sigma_d;
  }

  static CodingConfig pulsed(double nu, double sigma_m, double sigma_d,
                             double theta_g = 0.0, int k_taps = 4,
                             AmplitudeConvention convention =
                                 AmplitudeConvention::UnitAmplitude) {
    CodingConfig c;
    c.nu = nu;
    c.k_taps = k_taps;
    c.theta_g = wrap_two_pi(theta_g);
    c.modulation = {ModulationKind::GaussianPulseTrain, sigma_m, convention};
    c.demodulation = {DemodulationKind::SmoothedRect, sigma_d};
    c.validate();
    return c;
  }

  static CodingConfig sinusoid(double nu, double theta_g = 0.0,
                               int k_taps = 4) {
    CodingConfig c;
    c.nu = nu;
    c.k_taps = k_taps;
    c.theta_g = wrap_two_pi(theta_g);
    c.modulation = {ModulationKind::Sinusoid, 0.0,
                    AmplitudeConvention::UnitAmplitude};
    c.demodulation = {DemodulationKind::Sinusoid, 0.0};
    c.validate();
    return c;
  }
};

/// Phase equivalent of a round-trip distance: phi = 2*omega*depth/c.
/// Accepts 0 <= depth <= c/(2*nu); the upper endpoint maps to 2*pi.
inline double phase_from_depth(double depth, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw DomainError("phase_from_depth: omega must be positive");
  if (!std::isfinite(depth) || depth < 0.0)
    throw DomainError("phase_from_depth: depth must be finite and >= 0");
  const double range = pi * speed_of_light / omega;  // c / (2 nu)
  if (depth > range)
    throw DomainError("phase_from_depth: depth beyond unambiguity range");
  return 2.0 * omega * depth / speed_of_light;
}

/// Inverse of phase_from_depth (no range check; callers wrap as needed).
inline double depth_from_phase(double phi, double omega) {
  return phi * speed_of_light / (2.0 * omega);
}

/// Converts a pulse full width at half maximum [s] into the Gaussian
/// sigma_m [rad]: sigma = fwhm * omega / (2*sqrt(2 ln 2)).
inline double fwhm_to_sigma(double fwhm_s, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw DomainError("fwhm_to_sigma: omega must be positive");
  if (!(fwhm_s > 0.0) || !std::isfinite(fwhm_s))
    throw DomainError("fwhm_to_sigma: fwhm must be positive and finite");
  const double sigma = fwhm_s * omega / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  if (6.0 * sigma >= two_pi)
    throw ModelValidityError("fwhm_to_sigma: pulse too wide, 6*sigma >= 2*pi");
  return sigma;
}

namespace detail {

/// Pulse-train peak amplitude implied by the configured convention.
inline double pulse_amplitude(const CodingConfig& c) {
  const double sm = c.modulation.sigma_m;
  switch (c.modulation.convention) {
    case AmplitudeConvention::UnitAmplitude:
      // Effective post-smoothing Gaussian has unit peak; for sigma_d = 0
      // the emitted pulse itself has amplitude 1.
      return c.sigma_eff() / sm;
    case AmplitudeConvention::UnitAveragePower:
      // Period mean 1/2, same as the raised cosine.
      return pi / (sm * std::sqrt(two_pi));
  }
  return 1.0;
}

/// Factor that converts the unit-amplitude closed form into the configured
/// convention. amplitude * sigma_m / sigma_eff, with the plateau value
/// sigma_eff*sqrt(2*pi)/omega staying exact under UnitAmplitude.
inline double correlation_scale(const CodingConfig& c) {
  switch (c.modulation.convention) {
    case AmplitudeConvention::UnitAmplitude:
      return 1.0;
    case AmplitudeConvention::UnitAveragePower:
      return pi / (c.sigma_eff() * std::sqrt(two_pi));
  }
  return 1.0;
}

inline void require_pulsed(const CodingConfig& c, const char* op) {
  c.validate();
  if (!c.is_pulsed())
    throw UnsupportedCodingError(std::string(op) +
                                 ": requires pulse-train modulation with "
                                 "smoothed-rect demodulation");
}

inline void require_tap(const CodingConfig& c, int tap, const char* op) {
  if (tap < 0 || tap >= c.k_taps)
    throw DomainError(std::string(op) + ": tap index out of range");
}

}  // namespace detail

/// Base modulation waveform i(phi), pulse centered at phi = 0 mod 2*pi.
/// The caller applies the scene's phase shift by evaluating at
/// phi - phi_gamma.
inline double modulation_value(const CodingConfig& c, double phi) {
  if (!std::isfinite(phi)) throw DomainError("modulation_value: non-finite phase");
  if (c.modulation.kind == ModulationKind::Sinusoid)
    return 0.5 * (1.0 + std::cos(phi));
  const double amplitude = detail::pulse_amplitude(c);
  const double u = std::remainder(phi, two_pi);
  const double inv2s2 =
      1.0 / (2.0 * c.modulation.sigma_m * c.modulation.sigma_m);
  double sum = 0.0;
  for (int n = -2; n <= 2; ++n) {
    const double d = u - two_pi * n;
    sum += std::exp(-d * d * inv2s2);
  }
  return amplitude * sum;
}

/// Base demodulation gain s(phi), rect (or cosine peak) centered at
/// phi = 0 mod 2*pi. Tap i uses s(phi - theta_i).
inline double demodulation_value(const CodingConfig& c, double phi) {
  if (!std::isfinite(phi)) throw DomainError("demodulation_value: non-finite phase");
  if (c.demodulation.kind == DemodulationKind::Sinusoid)
    return 0.5 * (1.0 + std::cos(phi));
  const double sd = c.demodulation.sigma_d;
  const double u = std::remainder(phi, two_pi);
  if (sd == 0.0) {
    const double au = std::fabs(u);
    if (au < pi / 2.0) return 1.0;
    if (au == pi / 2.0) return 0.5;
    return 0.0;
  }
  const double inv = 1.0 / (sd * std::sqrt(2.0));
  double sum = 0.0;
  for (int n = -2; n <= 2; ++n) {
    const double d = u - two_pi * n;
    sum += 0.5 * (erf_eval((d + pi / 2.0) * inv) - erf_eval((d - pi / 2.0) * inv));
  }
  return sum;
}

/// Integral of the demodulation gain over one period [rad]; pi for both
/// supported kinds (duty 0.5). Multiplied by E_a/omega this gives the
/// per-period ambient contribution of a tap.
inline double demodulation_period_integral(const CodingConfig& c) {
  (void)c;
  return pi;
}

/// Correlation of the pulse train with the smoothed rect for tap `tap` at
/// scene phase `phase_depth`, one modulation period, closed form:
///
///   C(x) = scale/omega * sqrt(pi)/(2 sqrt(a)) * [erf(sqrt(a) (x + pi/2))
///                                              - erf(sqrt(a) (x - pi/2))]
///
/// with a = 1/(2 sigma_eff^2) and x = phase_depth - theta_i wrapped into
/// (-pi, pi]. Periodic in the phase by construction.
inline double closed_form_correlation(const CodingConfig& c,
                                      double phase_depth, int tap) {
  detail::require_pulsed(c, "closed_form_correlation");
  detail::require_tap(c, tap, "closed_form_correlation");
  if (!std::isfinite(phase_depth))
    throw DomainError("closed_form_correlation: non-finite phase");
  const double sigma = c.sigma_eff();
  const double sqrt_a = 1.0 / (sigma * std::sqrt(2.0));
  const double x = wrap_pm_pi(phase_depth - c.tap_shift(tap));
  const double upper = erf_eval(sqrt_a * (x + pi / 2.0));
  const double lower = erf_eval(sqrt_a * (x - pi / 2.0));
  const double base = std::sqrt(pi) / (2.0 * sqrt_a) * (upper - lower);
  return detail::correlation_scale(c) * base / c.omega();
}

/// Analytic correlation for the raised-cosine pair:
/// C(x) = (pi/2 + (pi/4) cos x)/omega with x = phase_depth - theta_i.
inline double sinusoid_correlation(const CodingConfig& c, double phase_depth,
                                   int tap) {
  c.validate();
  if (!c.is_sinusoid())
    throw UnsupportedCodingError("sinusoid_correlation: requires sinusoid coding");
  detail::require_tap(c, tap, "sinusoid_correlation");
  if (!std::isfinite(phase_depth))
    throw DomainError("sinusoid_correlation: non-finite phase");
  const double x = phase_depth - c.tap_shift(tap);
  return (pi / 2.0 + (pi / 4.0) * std::cos(x)) / c.omega();
}

/// Per-period correlation for either supported coding.
inline double correlation_value(const CodingConfig& c, double phase_depth,
                                int tap) {
  return c.is_sinusoid() ? sinusoid_correlation(c, phase_depth, tap)
                         : closed_form_correlation(c, phase_depth, tap);
}

/// d C / d phi_gamma. Pulsed coding: a positive Gaussian on the rising
/// edge at x = -pi/2 and a negative one on the falling edge at x = +pi/2,
///   C'(x) = scale/omega * [exp(-a (x + pi/2)^2) - exp(-a (x - pi/2)^2)].
/// Sinusoid coding: C'(x) = -(pi/4) sin(x) / omega.
inline double correlation_derivative(const CodingConfig& c,
                                     double phase_depth, int tap) {
  c.validate();
  detail::require_tap(c, tap, "correlation_derivative");
  if (!std::isfinite(phase_depth))
    throw DomainError("correlation_derivative: non-finite phase");
  if (c.is_sinusoid()) {
    const double x = phase_depth - c.tap_shift(tap);
    return -(pi / 4.0) * std::sin(x) / c.omega();
  }
  const double sigma = c.sigma_eff();
  const double a = 1.0 / (2.0 * sigma * sigma);
  const double x = wrap_pm_pi(phase_depth - c.tap_shift(tap));
  const double up = x + pi / 2.0;
  const double dn = x - pi / 2.0;
  const double base = std::exp(-a * up * up) - std::exp(-a * dn * dn);
  return detail::correlation_scale(c) * base / c.omega();
}

/// Phases of maximum |dC/dphi| for one tap: the rising edge at
/// theta_i - pi/2 and the falling edge at theta_i + pi/2, both in [0, 2*pi).
inline std::pair<double, double> max_sensitivity_phases(const CodingConfig& c,
                                                        int tap) {
  detail::require_pulsed(c, "max_sensitivity_phases");
  detail::require_tap(c, tap, "max_sensitivity_phases");
  const double theta = c.tap_shift(tap);
  return {wrap_two_pi(theta - pi / 2.0), wrap_two_pi(theta + pi / 2.0)};
}

/// Global demodulation shift that places a depth of interest at the
/// sensitivity extremum of tap 0: theta_g = phi(doi) - pi/2 mod 2*pi.
inline double doi_to_global_shift(double doi, const CodingConfig& c) {
  detail::require_pulsed(c, "doi_to_global_shift");
  const double phi = phase_from_depth(doi, c.omega());
  if (doi == c.unambiguity_range())
    throw DomainError("doi_to_global_shift: doi must be below the unambiguity range");
  return wrap_two_pi(phi - pi / 2.0);
}

struct SensitiveRange {
  double phase_width;  // [rad]
  double depth_width;  // [m]
};

/// 1/e^2 width of a correlation edge: 4*sigma_eff in phase, mapped to
/// depth by c/(2*omega).
inline SensitiveRange sensitive_range(const CodingConfig& c) {
  detail::require_pulsed(c, "sensitive_range");
  const double w = 4.0 * c.sigma_eff();
  return {w, depth_from_phase(w, c.omega())};
}

}  // namespace pctof
