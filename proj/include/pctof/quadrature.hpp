#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pctof/constants.hpp"
#include "pctof/errors.hpp"
#include "pctof/signal_model.hpp"

namespace pctof {

namespace detail {

/// Adaptive Simpson refinement over a fixed set of seed panels. The global
/// budget counts panel splits; exhausting it raises IntegrationError.
template <class F>
class AdaptiveSimpson {
 public:
  AdaptiveSimpson(const F& f, double rel_tol, std::size_t max_panels,
                  double abs_tol)
      : f_(f), rel_tol_(rel_tol), max_panels_(max_panels), abs_tol_(abs_tol) {}

  double integrate(const std::vector<double>& breakpoints) {
    double coarse_abs = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
      const double a = breakpoints[i], b = breakpoints[i + 1];
      if (!(b > a)) continue;
      coarse_abs += std::fabs(simpson(a, b, f_(a), f_(0.5 * (a + b)), f_(b)));
    }
    // Absolute tolerance from a coarse magnitude estimate. The caller's
    // abs_tol floor keeps refinement from chasing integrand roundoff when
    // the true integral is far below the caller's scale of interest; the
    // 1e-300 floor keeps identically-zero integrands from recursing forever.
    const double tol = std::max({rel_tol_ * coarse_abs, abs_tol_, 1e-300});
    const double total_width = breakpoints.back() - breakpoints.front();

    double total = 0.0;
    panels_used_ = 0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
      const double a = breakpoints[i], b = breakpoints[i + 1];
      if (!(b > a)) continue;
      const double fa = f_(a), fb = f_(b), fm = f_(0.5 * (a + b));
      total += refine(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb),
                      tol * (b - a) / total_width);
    }
    return total;
  }

 private:
  static double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  }

  double refine(double a, double b, double fa, double fm, double fb,
                double whole, double tol) {
    if (++panels_used_ > max_panels_)
      throw IntegrationError("quadrature: refinement budget exhausted");
    const double m = 0.5 * (a + b);
    const double lm = f_(0.5 * (a + m));
    const double rm = f_(0.5 * (m + b));
    const double left = simpson(a, m, fa, lm, fm);
    const double right = simpson(m, b, fm, rm, fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol || (b - a) < 1e-14)
      return left + right + delta / 15.0;
    return refine(a, m, fa, lm, fm, left, 0.5 * tol) +
           refine(m, b, fm, rm, fb, right, 0.5 * tol);
  }

  const F& f_;
  double rel_tol_;
  std::size_t max_panels_;
  double abs_tol_;
  std::size_t panels_used_ = 0;
};

}  // namespace detail

/// Integrates f over [a, b] with adaptive Simpson refinement seeded at the
/// given interior feature locations (clamped into the interval). rel_tol is
/// relative to a coarse estimate of the integral of |f|; abs_tol is an
/// optional absolute floor for callers whose integrand carries roundoff
/// noise larger than rel_tol times a near-zero integral.
template <class F>
inline double integrate_adaptive(const F& f, double a, double b,
                                 const std::vector<double>& features = {},
                                 double rel_tol = 1e-9,
                                 std::size_t max_panels = (std::size_t{1} << 22),
                                 double abs_tol = 0.0) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("integrate_adaptive: bad interval");
  std::vector<double> pts;
  const int base_panels = 16;
  pts.reserve(features.size() + base_panels + 1);
  for (int i = 0; i <= base_panels; ++i)
    pts.push_back(a + (b - a) * static_cast<double>(i) / base_panels);
  for (double x : features)
    if (x > a && x < b) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  detail::AdaptiveSimpson<F> engine(f, rel_tol, max_panels, abs_tol);
  return engine.integrate(pts);
}

/// Numerical oracle for the per-period correlation: integrates
/// i(phi - phase_depth) * s(phi - tap_shift) over one period divided by
/// omega, using only the evaluable signal shapes. Independent of the
/// closed-form expression, so the two can check each other.
inline double quadrature_correlate(const ModulationSpec& modulation,
                                   const DemodulationSpec& demodulation,
                                   double phase_depth, double tap_shift,
                                   double omega, double rel_tol = 1e-9,
                                   std::size_t max_panels = (std::size_t{1} << 22)) {
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw DomainError("quadrature_correlate: omega must be positive");
  if (!std::isfinite(phase_depth) || !std::isfinite(tap_shift))
    throw DomainError("quadrature_correlate: non-finite phase argument");

  CodingConfig c;
  c.nu = omega / two_pi;
  c.k_taps = 4;
  c.theta_g = 0.0;
  c.modulation = modulation;
  c.demodulation = demodulation;
  c.validate();

  // Seed panel boundaries at signal features so narrow pulses and rect
  // edges cannot hide inside a smooth-looking panel.
  std::vector<double> features;
  auto add_feature_set = [&features](double center, double width) {
    for (int n = -1; n <= 1; ++n) {
      const double base = center + two_pi * n;
      features.push_back(base);
      for (int k = 1; k <= 6; k += (k < 3 ? 1 : 3)) {
        features.push_back(base - k * width);
        features.push_back(base + k * width);
      }
    }
  };
  if (c.modulation.kind == ModulationKind::GaussianPulseTrain)
    add_feature_set(wrap_two_pi(phase_depth), c.modulation.sigma_m);
  if (c.demodulation.kind == DemodulationKind::SmoothedRect) {
    const double edge_width =
        c.demodulation.sigma_d > 0.0 ? c.demodulation.sigma_d : 1e-3;
    add_feature_set(wrap_two_pi(tap_shift - pi / 2.0), edge_width);
    add_feature_set(wrap_two_pi(tap_shift + pi / 2.0), edge_width);
  }

  auto integrand = [&](double phi) {
    return modulation_value(c, phi - phase_depth) *
           demodulation_value(c, phi - tap_shift);
  };
  // Anchor the absolute tolerance to the correlation's plateau magnitude
  // (in pre-division units). Near a trough the integrand is a product of
  // erf/exp tails whose roundoff exceeds any relative share of the tiny
  // local integral, so a purely relative tolerance can never be met there.
  const double plateau_scale =
      c.modulation.kind == ModulationKind::GaussianPulseTrain
          ? detail::correlation_scale(c) * c.sigma_eff() * std::sqrt(two_pi)
          : pi;
  return integrate_adaptive(integrand, 0.0, two_pi, features, rel_tol,
                            max_panels, rel_tol * plateau_scale) /
         omega;
}

}  // namespace pctof
