#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pctof/errors.hpp"

namespace pctof {

/// Strictly increasing abscissae with one sample each; the unit handed to
/// the monotone fitting pipeline.
struct SampledCurve {
  std::vector<double> xs;
  std::vector<double> ys;

  void validate() const {
    if (xs.size() != ys.size())
      throw DomainError("SampledCurve: xs/ys length mismatch");
    if (xs.size() < 4)
      throw DomainError("SampledCurve: need at least 4 samples");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]))
        throw DomainError("SampledCurve: non-finite sample");
      if (i > 0 && !(xs[i] > xs[i - 1]))
        throw DomainError("SampledCurve: xs must be strictly increasing");
    }
  }
};

/// Least-squares non-decreasing fit (pool adjacent violators). Running it
/// on an already non-decreasing input returns the values unchanged, so the
/// operation is exactly idempotent.
inline SampledCurve isotonic_fit(const SampledCurve& curve) {
  curve.validate();
  const std::size_t n = curve.ys.size();
  std::vector<double> sum(n);
  std::vector<std::size_t> count(n);
  std::vector<double> value(n);
  std::size_t blocks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sum[blocks] = curve.ys[i];
    count[blocks] = 1;
    value[blocks] = curve.ys[i];
    ++blocks;
    while (blocks > 1 && value[blocks - 1] < value[blocks - 2]) {
      sum[blocks - 2] += sum[blocks - 1];
      count[blocks - 2] += count[blocks - 1];
      value[blocks - 2] = sum[blocks - 2] / static_cast<double>(count[blocks - 2]);
      --blocks;
    }
  }
  SampledCurve out;
  out.xs = curve.xs;
  out.ys.reserve(n);
  for (std::size_t b = 0; b < blocks; ++b)
    out.ys.insert(out.ys.end(), count[b], value[b]);
  return out;
}

/// Natural cubic spline in value/second-derivative form, fitted to be
/// non-decreasing over its domain. The range endpoints are the values at
/// the domain endpoints.
struct MonotoneResponse {
  std::vector<double> xs;  // knots, strictly increasing
  std::vector<double> ys;  // values at knots
  std::vector<double> m2;  // second derivatives at knots, natural ends = 0
  double smoothing = 0.0;  // final penalty weight used by the fit

  double x_lo() const { return xs.front(); }
  double x_hi() const { return xs.back(); }
  double y_lo() const { return ys.front(); }
  double y_hi() const { return ys.back(); }

  void validate() const {
    if (xs.size() < 2 || xs.size() != ys.size() || xs.size() != m2.size())
      throw DegenerateEdgeError("MonotoneResponse: inconsistent arrays");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(ys[i]) || !std::isfinite(m2[i]))
        throw DegenerateEdgeError("MonotoneResponse: non-finite entry");
      if (i > 0 && !(xs[i] > xs[i - 1]))
        throw DegenerateEdgeError("MonotoneResponse: knots not increasing");
    }
  }

  double value(double x) const {
    const std::size_t i = segment(x);
    const double h = xs[i + 1] - xs[i];
    const double a = (xs[i + 1] - x) / h;
    const double b = 1.0 - a;
    return a * ys[i] + b * ys[i + 1] +
           ((a * a * a - a) * m2[i] + (b * b * b - b) * m2[i + 1]) * h * h / 6.0;
  }

  double derivative(double x) const {
    const std::size_t i = segment(x);
    const double h = xs[i + 1] - xs[i];
    const double a = (xs[i + 1] - x) / h;
    const double b = 1.0 - a;
    return (ys[i + 1] - ys[i]) / h +
           ((1.0 - 3.0 * a * a) * m2[i] + (3.0 * b * b - 1.0) * m2[i + 1]) * h / 6.0;
  }

 private:
  std::size_t segment(double x) const {
    if (!std::isfinite(x)) throw DomainError("MonotoneResponse: non-finite abscissa");
    if (x < xs.front() || x > xs.back())
      throw DomainError("MonotoneResponse: evaluation outside domain");
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    if (i > 0) --i;
    if (i + 1 >= xs.size()) i = xs.size() - 2;
    return i;
  }
};

namespace detail {

/// Penalized natural cubic spline solver (second-difference operator Q and
/// tridiagonal Gram matrix R): minimizes |y - g|^2 + lambda * g'' energy by
/// solving (R + lambda * Q^T Q) gamma = Q^T y, g = y - lambda * Q * gamma.
/// The matrix is pentadiagonal SPD; LDL^T factorization plus the Takahashi
/// selected-inverse recurrence give the exact influence-matrix trace for
/// generalized cross-validation in O(n).
class SplineSystem {
 public:
  explicit SplineSystem(const std::vector<double>& xs) : xs_(&xs) {
    const std::size_t n = xs.size();
    m_ = n - 2;
    h_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) h_[i] = xs[i + 1] - xs[i];
    q0_.resize(m_);
    q1_.resize(m_);
    q2_.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      q0_[j] = 1.0 / h_[j];
      q1_[j] = -1.0 / h_[j] - 1.0 / h_[j + 1];
      q2_[j] = 1.0 / h_[j + 1];
    }
    r0_.resize(m_);
    r1_.assign(m_ > 1 ? m_ - 1 : 0, 0.0);
    b0_.resize(m_);
    b1_.assign(m_ > 1 ? m_ - 1 : 0, 0.0);
    b2_.assign(m_ > 2 ? m_ - 2 : 0, 0.0);
    for (std::size_t j = 0; j < m_; ++j) {
      r0_[j] = (h_[j] + h_[j + 1]) / 3.0;
      b0_[j] = q0_[j] * q0_[j] + q1_[j] * q1_[j] + q2_[j] * q2_[j];
    }
    for (std::size_t j = 0; j + 1 < m_; ++j) {
      r1_[j] = h_[j + 1] / 6.0;
      b1_[j] = q1_[j] * q0_[j + 1] + q2_[j] * q1_[j + 1];
    }
    for (std::size_t j = 0; j + 2 < m_; ++j) b2_[j] = q2_[j] * q0_[j + 2];
  }

  double mean_spacing() const {
    return (xs_->back() - xs_->front()) / static_cast<double>(h_.size());
  }

  void factor(double lambda) {
    lambda_ = lambda;
    d_.assign(m_, 0.0);
    e1_.assign(m_, 0.0);
    e2_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double a2 = i >= 2 ? lambda * b2_[i - 2] : 0.0;
      const double a1 = i >= 1 ? r1_[i - 1] + lambda * b1_[i - 1] : 0.0;
      const double a0 = r0_[i] + lambda * b0_[i];
      if (i >= 2) e2_[i] = a2 / d_[i - 2];
      if (i >= 1) {
        double v = a1;
        if (i >= 2) v -= e2_[i] * d_[i - 2] * e1_[i - 1];
        e1_[i] = v / d_[i - 1];
      }
      double dv = a0;
      if (i >= 1) dv -= e1_[i] * e1_[i] * d_[i - 1];
      if (i >= 2) dv -= e2_[i] * e2_[i] * d_[i - 2];
      if (!(dv > 0.0))
        throw FitError("SplineSystem: factorization lost positive definiteness");
      d_[i] = dv;
    }
  }

  /// Solves for gamma (interior second derivatives) given data y.
  std::vector<double> solve_gamma(const std::vector<double>& y) const {
    std::vector<double> rhs(m_);
    for (std::size_t j = 0; j < m_; ++j)
      rhs[j] = q0_[j] * y[j] + q1_[j] * y[j + 1] + q2_[j] * y[j + 2];
    for (std::size_t i = 0; i < m_; ++i) {
      if (i >= 1) rhs[i] -= e1_[i] * rhs[i - 1];
      if (i >= 2) rhs[i] -= e2_[i] * rhs[i - 2];
    }
    for (std::size_t i = 0; i < m_; ++i) rhs[i] /= d_[i];
    for (std::size_t ii = m_; ii-- > 0;) {
      if (ii + 1 < m_) rhs[ii] -= e1_[ii + 1] * rhs[ii + 1];
      if (ii + 2 < m_) rhs[ii] -= e2_[ii + 2] * rhs[ii + 2];
    }
    return rhs;
  }

  /// Residual vector y - g = lambda * Q * gamma.
  std::vector<double> residual(const std::vector<double>& gamma) const {
    const std::size_t n = m_ + 2;
    std::vector<double> r(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      if (i < m_) v += q0_[i] * gamma[i];
      if (i >= 1 && i - 1 < m_) v += q1_[i - 1] * gamma[i - 1];
      if (i >= 2 && i - 2 < m_) v += q2_[i - 2] * gamma[i - 2];
      r[i] = lambda_ * v;
    }
    return r;
  }

  /// trace((R + lambda B)^{-1} B) from the banded selected inverse.
  double trace_inv_b() const {
    std::vector<double> zd(m_, 0.0), z1(m_ > 1 ? m_ - 1 : 0, 0.0),
        z2(m_ > 2 ? m_ - 2 : 0, 0.0);
    for (std::size_t ii = m_; ii-- > 0;) {
      const double l1 = ii + 1 < m_ ? e1_[ii + 1] : 0.0;
      const double l2 = ii + 2 < m_ ? e2_[ii + 2] : 0.0;
      if (ii + 2 < m_)
        z2[ii] = -(l1 * z1[ii + 1] + l2 * zd[ii + 2]);
      if (ii + 1 < m_) {
        const double za = zd[ii + 1];
        const double zb = ii + 2 < m_ ? z1[ii + 1] : 0.0;
        z1[ii] = -(l1 * za + l2 * zb);
      }
      double v = 1.0 / d_[ii];
      if (ii + 1 < m_) v -= l1 * z1[ii];
      if (ii + 2 < m_) v -= l2 * z2[ii];
      zd[ii] = v;
    }
    double tr = 0.0;
    for (std::size_t i = 0; i < m_; ++i) tr += zd[i] * b0_[i];
    for (std::size_t i = 0; i + 1 < m_; ++i) tr += 2.0 * z1[i] * b1_[i];
    for (std::size_t i = 0; i + 2 < m_; ++i) tr += 2.0 * z2[i] * b2_[i];
    return tr;
  }

  double lambda() const { return lambda_; }

 private:
  const std::vector<double>* xs_;
  std::size_t m_ = 0;
  double lambda_ = 0.0;
  std::vector<double> h_, q0_, q1_, q2_, r0_, r1_, b0_, b1_, b2_;
  std::vector<double> d_, e1_, e2_;
};

struct SplineFitResult {
  std::vector<double> g;   // fitted values
  std::vector<double> m2;  // second derivatives (natural ends)
  double rss = 0.0;
};

inline SplineFitResult fit_spline(SplineSystem& sys,
                                  const std::vector<double>& y,
                                  double lambda) {
  sys.factor(lambda);
  const auto gamma = sys.solve_gamma(y);
  const auto res = sys.residual(gamma);
  SplineFitResult out;
  const std::size_t n = y.size();
  out.g.resize(n);
  out.m2.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.g[i] = y[i] - res[i];
    out.rss += res[i] * res[i];
  }
  for (std::size_t j = 0; j + 2 < n; ++j) out.m2[j + 1] = gamma[j];
  return out;
}

/// Generalized cross-validation over a wide logarithmic grid; ties resolve
/// to the smaller penalty.
inline double gcv_select(SplineSystem& sys, const std::vector<double>& y) {
  const std::size_t n = y.size();
  const double h3 = std::pow(sys.mean_spacing(), 3);
  double best_lambda = h3 * 1e-8;
  double best_score = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 36; ++k) {
    const double lambda = h3 * std::pow(10.0, -8.0 + 0.5 * k);
    sys.factor(lambda);
    const auto gamma = sys.solve_gamma(y);
    const auto res = sys.residual(gamma);
    double rss = 0.0;
    for (double r : res) rss += r * r;
    const double denom = lambda * sys.trace_inv_b();
    if (!(denom > 0.0)) continue;
    const double score = static_cast<double>(n) * rss / (denom * denom);
    if (score < best_score) {
      best_score = score;
      best_lambda = lambda;
    }
  }
  return best_lambda;
}

}  // namespace detail

/// Monotone response fit: isotonic projection followed by a natural cubic
/// smoothing spline. smoothing < 0 selects the penalty by generalized
/// cross-validation; smoothing == 0 interpolates. If the spline's first
/// derivative dips below zero at any knot or interval midpoint, the penalty
/// is doubled and the fit repeated. Escalation terminates: as the penalty
/// grows the natural spline tends to the least-squares line through the
/// isotonic (non-constant, non-decreasing) values, whose slope is positive,
/// but GCV may start many decades below that regime on noisy staircases.
inline MonotoneResponse fit_monotone_response(const SampledCurve& curve,
                                              double smoothing = -1.0) {
  curve.validate();
  const std::size_t n = curve.ys.size();
  double span_lo = curve.ys[0], span_hi = curve.ys[0];
  for (double v : curve.ys) {
    span_lo = std::min(span_lo, v);
    span_hi = std::max(span_hi, v);
  }
  if (span_hi == span_lo)
    throw DegenerateEdgeError("fit_monotone_response: all samples equal");

  const SampledCurve iso = isotonic_fit(curve);
  detail::SplineSystem sys(curve.xs);
  double lambda = smoothing < 0.0 ? detail::gcv_select(sys, iso.ys) : smoothing;
  const double lambda_floor = std::pow(sys.mean_spacing(), 3);
  const double slope_scale =
      (span_hi - span_lo) / (curve.xs.back() - curve.xs.front());
  const double slope_tol = -1e-10 * slope_scale;

  for (int round = 0; round <= 60; ++round) {
    const auto fit = detail::fit_spline(sys, iso.ys, lambda);
    MonotoneResponse response;
    response.xs = curve.xs;
    response.ys = fit.g;
    response.m2 = fit.m2;
    response.smoothing = lambda;
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < n && monotone; ++i) {
      const double mid = 0.5 * (curve.xs[i] + curve.xs[i + 1]);
      if (response.derivative(curve.xs[i]) < slope_tol ||
          response.derivative(mid) < slope_tol)
        monotone = false;
    }
    if (monotone && response.derivative(curve.xs[n - 1]) < slope_tol)
      monotone = false;
    if (monotone) return response;
    lambda = lambda == 0.0 ? lambda_floor : 2.0 * lambda;
  }
  throw FitError("fit_monotone_response: could not reach a monotone fit");
}

/// Inverts a non-decreasing response by bisection to 1e-12 abscissa
/// accuracy. Values outside [y_lo, y_hi] raise OutOfSensitiveRangeError.
inline double invert_monotone(const MonotoneResponse& response, double psi) {
  response.validate();
  if (!std::isfinite(psi)) throw DomainError("invert_monotone: non-finite value");
  const double lo_v = response.y_lo();
  const double hi_v = response.y_hi();
  if (psi < lo_v || psi > hi_v)
    throw OutOfSensitiveRangeError("invert_monotone: value outside response range");
  double lo = response.x_lo();
  double hi = response.x_hi();
  if (psi == lo_v) return lo;
  if (psi == hi_v) return hi;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // floating-point spacing limit
    if (response.value(mid) < psi)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace pctof
