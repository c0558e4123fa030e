#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "pctof/acquisition.hpp"
#include "pctof/constants.hpp"
#include "pctof/errors.hpp"
#include "pctof/monotone.hpp"
#include "pctof/parallel.hpp"
#include "pctof/rng.hpp"
#include "pctof/scene.hpp"
#include "pctof/signal_model.hpp"

namespace pctof {

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw EmptyMetricError("median_of: empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Lower-middle order statistic. Used for the mask so that subtracting the
/// median leaves a mask whose own lower median is exactly zero.
inline double lower_median_of(std::vector<double> v) {
  if (v.empty()) throw EmptyMetricError("lower_median_of: empty set");
  const std::size_t k = (v.size() - 1) / 2;
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

/// Raw-fraction samples over a strictly increasing global-shift axis. A
/// full-period coarse sweep covers [0, 2*pi); fine sweeps over an interval
/// that crosses 2*pi keep an unwrapped axis (equivalent mod 2*pi).
struct SweepRecord {
  int width = 0;
  int height = 0;
  std::vector<double> theta_g;
  std::vector<std::vector<double>> psi;            // [sample][pixel]
  std::vector<std::vector<std::uint8_t>> valid;    // [sample][pixel]

  std::size_t sample_count() const { return theta_g.size(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  void validate() const {
    if (width <= 0 || height <= 0)
      throw DomainError("SweepRecord: dimensions must be positive");
    if (psi.size() != theta_g.size() || valid.size() != theta_g.size())
      throw DomainError("SweepRecord: row count mismatch");
    for (std::size_t j = 0; j < theta_g.size(); ++j) {
      if (!std::isfinite(theta_g[j]))
        throw DomainError("SweepRecord: non-finite sweep phase");
      if (j > 0 && !(theta_g[j] > theta_g[j - 1]))
        throw DomainError("SweepRecord: sweep phases must increase strictly");
      if (psi[j].size() != pixel_count() || valid[j].size() != pixel_count())
        throw DomainError("SweepRecord: sample row size mismatch");
    }
  }
};

struct Plateaus {
  double hi = 0.0;
  double lo = 0.0;
};

struct PhaseInterval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Renders the raw fraction at n equally spaced global shifts covering one
/// period. Each sample uses a child seed of (seed, sample index), so the
/// record is reproducible regardless of n ordering or worker scheduling.
inline SweepRecord coarse_sweep(const SceneFrame& target,
                                const AcquisitionConfig& acq, int n = 512) {
  if (n < 16) throw DomainError("coarse_sweep: need at least 16 sweep steps");
  target.validate();
  acq.validate_for(target.width, target.height);
  SweepRecord record;
  record.width = target.width;
  record.height = target.height;
  record.theta_g.reserve(n);
  record.psi.reserve(n);
  record.valid.reserve(n);
  for (int j = 0; j < n; ++j) {
    AcquisitionConfig step = acq;
    step.coding.theta_g = two_pi * j / n;
    step.seed = child_seed(acq.seed, stream_purpose::coarse_sweep,
                           static_cast<std::uint64_t>(j));
    RawFractionFrame rf = raw_fraction(render_taps(target, step));
    record.theta_g.push_back(step.coding.theta_g);
    record.psi.push_back(std::move(rf.psi));
    record.valid.push_back(std::move(rf.valid));
  }
  return record;
}

/// Plateau levels from decile-band medians. The bands are anchored on the
/// medians of the upper and lower half of the valid samples rather than on
/// the raw extremes: the raw fraction has poles where its denominator
/// crosses zero, so the literal sample span is unbounded and order
/// statistics are the only stable anchor. Within each band the median is
/// taken, which keeps occasional pole samples from dragging the estimate.
inline Plateaus estimate_plateaus(const SweepRecord& sweep, std::size_t pixel) {
  sweep.validate();
  if (pixel >= sweep.pixel_count())
    throw DomainError("estimate_plateaus: pixel out of range");
  if (sweep.sample_count() < 16)
    throw DomainError("estimate_plateaus: need at least 16 sweep samples");
  std::vector<double> values;
  values.reserve(sweep.sample_count());
  for (std::size_t j = 0; j < sweep.sample_count(); ++j)
    if (sweep.valid[j][pixel]) values.push_back(sweep.psi[j][pixel]);
  if (values.size() < 16)
    throw DegenerateSweepError("estimate_plateaus: too few valid samples");

  const double mid = median_of(values);
  std::vector<double> upper, lower;
  for (double v : values) (v > mid ? upper : lower).push_back(v);
  if (upper.empty() || lower.empty())
    throw DegenerateSweepError("estimate_plateaus: no spread around median");
  const double m_hi = median_of(upper);
  const double m_lo = median_of(lower);
  const double span = m_hi - m_lo;
  const double scale = std::max({1.0, std::fabs(m_hi), std::fabs(m_lo)});
  if (!(span > 1e-12 * scale))
    throw DegenerateSweepError("estimate_plateaus: span below noise floor");

  std::vector<double> band_hi, band_lo;
  for (double v : values) {
    if (v >= m_hi - 0.1 * span) band_hi.push_back(v);
    if (v <= m_lo + 0.1 * span) band_lo.push_back(v);
  }
  return {median_of(band_hi), median_of(band_lo)};
}

/// Midpoint of the plateau levels: the raw-fraction value whose crossing
/// marks the phase of maximum sensitivity.
inline double zero_equivalent(double plateau_hi, double plateau_lo) {
  if (!std::isfinite(plateau_hi) || !std::isfinite(plateau_lo))
    throw DomainError("zero_equivalent: non-finite plateau");
  if (!(plateau_hi > plateau_lo))
    throw DomainError("zero_equivalent: plateau_hi must exceed plateau_lo");
  return 0.5 * (plateau_hi + plateau_lo);
}

/// Contiguous global-shift interval around a rising zero-equivalent
/// crossing where the raw fraction departs from both plateaus by more than
/// delta = 0.02 of the plateau span. Crossings are accepted only where
/// both neighbors are near the crossing level (within 0.75 span), which
/// rejects the pole jumps; of the accepted rising crossings the one
/// closest to hint_phase is used (first in sweep order when no hint).
inline PhaseInterval estimate_sensitive_interval(
    const SweepRecord& sweep, std::size_t pixel, const Plateaus& plateaus,
    double hint_phase = std::numeric_limits<double>::quiet_NaN()) {
  sweep.validate();
  if (pixel >= sweep.pixel_count())
    throw DomainError("estimate_sensitive_interval: pixel out of range");
  const double ze = zero_equivalent(plateaus.hi, plateaus.lo);
  const double span = plateaus.hi - plateaus.lo;
  const double delta = 0.02;
  const std::size_t n = sweep.sample_count();
  if (n < 4)
    throw DegenerateSweepError("estimate_sensitive_interval: too few samples");

  const auto wrap_index = [&](long long i) {
    const long long m = static_cast<long long>(n);
    long long r = i % m;
    if (r < 0) r += m;
    return static_cast<std::size_t>(r);
  };
  const auto theta_at = [&](long long i) {
    const long long m = static_cast<long long>(n);
    const long long k = i >= 0 ? i / m : -((-i + m - 1) / m);
    long long r = i - k * m;
    return sweep.theta_g[static_cast<std::size_t>(r)] + two_pi * k;
  };
  const auto psi_at = [&](long long i) { return sweep.psi[wrap_index(i)][pixel]; };
  const auto valid_at = [&](long long i) {
    return sweep.valid[wrap_index(i)][pixel] != 0;
  };

  std::vector<double> gaps(n);
  for (std::size_t j = 0; j < n; ++j)
    gaps[j] = theta_at(static_cast<long long>(j) + 1) -
              theta_at(static_cast<long long>(j));
  const double typical_gap = median_of(gaps);
  const auto gap_ok = [&](long long i) {
    return theta_at(i + 1) - theta_at(i) <= 3.0 * typical_gap;
  };

  struct Candidate {
    long long index;
    double crossing;
  };
  std::vector<Candidate> candidates;
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    if (!valid_at(i) || !valid_at(i + 1) || !gap_ok(i)) continue;
    const double a = psi_at(i), b = psi_at(i + 1);
    if (!(a < ze && b >= ze)) continue;
    if (std::fabs(a - ze) > 0.75 * span || std::fabs(b - ze) > 0.75 * span)
      continue;  // pole jump, not a smooth edge
    const double t = (ze - a) / (b - a);
    candidates.push_back({i, theta_at(i) + t * (theta_at(i + 1) - theta_at(i))});
  }
  if (candidates.empty())
    throw DegenerateSweepError(
        "estimate_sensitive_interval: no rising zero-equivalent crossing");

  const Candidate* chosen = &candidates.front();
  if (std::isfinite(hint_phase)) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
      const double d =
          std::fabs(circular_delta(hint_phase, wrap_two_pi(c.crossing)));
      if (d < best) {
        best = d;
        chosen = &c;
      }
    }
  }

  const double depart_lo = plateaus.lo + delta * span;
  const double depart_hi = plateaus.hi - delta * span;
  long long left = chosen->index;
  long long right = chosen->index + 1;
  std::size_t steps = 0;
  while (steps < n && valid_at(left - 1) && gap_ok(left - 1) &&
         psi_at(left) > depart_lo) {
    --left;
    ++steps;
  }
  steps = 0;
  while (steps < n && valid_at(right + 1) && gap_ok(right) &&
         psi_at(right) < depart_hi) {
    ++right;
    ++steps;
  }
  PhaseInterval interval{theta_at(left), theta_at(right)};
  if (!(interval.width() > 0.0) || interval.width() >= two_pi)
    throw DegenerateSweepError(
        "estimate_sensitive_interval: edge expansion did not terminate");
  return interval;
}

/// Sweeps the global shift over [interval.lo, interval.hi] at the given
/// step (default: the 14-bit phase quantum). The sweep axis stays
/// unwrapped; each rendered sample wraps its shift into [0, 2*pi).
inline SweepRecord fine_sweep(const SceneFrame& target,
                              const AcquisitionConfig& acq,
                              const PhaseInterval& interval,
                              double step = two_pi / 16384.0) {
  if (!std::isfinite(step) || step <= 0.0)
    throw DomainError("fine_sweep: step must be positive");
  if (!(interval.hi > interval.lo))
    throw DomainError("fine_sweep: empty interval");
  if (interval.width() >= two_pi)
    throw DomainError("fine_sweep: interval must be shorter than one period");
  target.validate();
  acq.validate_for(target.width, target.height);
  const std::size_t count = static_cast<std::size_t>(
      std::floor(interval.width() / step + 1e-9)) + 1;
  if (count > 1000000) throw DomainError("fine_sweep: step too small");
  SweepRecord record;
  record.width = target.width;
  record.height = target.height;
  for (std::size_t j = 0; j < count; ++j) {
    const double theta = interval.lo + static_cast<double>(j) * step;
    AcquisitionConfig sample = acq;
    sample.coding.theta_g = wrap_two_pi(theta);
    sample.seed = child_seed(acq.seed, stream_purpose::fine_sweep, j);
    RawFractionFrame rf = raw_fraction(render_taps(target, sample));
    record.theta_g.push_back(theta);
    record.psi.push_back(std::move(rf.psi));
    record.valid.push_back(std::move(rf.valid));
  }
  return record;
}

struct PixelCalibration {
  bool valid = false;
  double plateau_hi = 0.0;
  double plateau_lo = 0.0;
  double zero_equiv = 0.0;
  double zero_phase = 0.0;       // global shift at the zero-equivalent crossing
  PhaseInterval interval;        // response domain
  MonotoneResponse response;     // raw fraction vs global shift, rising
};

struct CalibrationTable {
  int width = 0;
  int height = 0;
  double reference_depth = 0.0;
  CodingConfig coding;
  std::uint64_t seed = 0;
  std::string config_fingerprint;
  std::vector<PixelCalibration> pixels;
  std::vector<double> mask;  // radians; zero for invalid pixels

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  std::size_t valid_count() const {
    std::size_t c = 0;
    for (const auto& p : pixels) c += p.valid ? 1 : 0;
    return c;
  }

  void validate() const {
    if (width <= 0 || height <= 0)
      throw DomainError("CalibrationTable: dimensions must be positive");
    if (pixels.size() != pixel_count() || mask.size() != pixel_count())
      throw DomainError("CalibrationTable: per-pixel array size mismatch");
    coding.validate();
    for (const auto& p : pixels) {
      if (!p.valid) continue;
      if (!(p.plateau_lo < p.zero_equiv && p.zero_equiv < p.plateau_hi))
        throw DomainError("CalibrationTable: zero equivalent outside plateaus");
      if (!(p.interval.lo <= p.zero_phase && p.zero_phase <= p.interval.hi))
        throw DomainError("CalibrationTable: zero phase outside interval");
      p.response.validate();
    }
  }
};

namespace detail {

/// Natural-spline resample of a fitted response onto a uniform knot grid;
/// keeps calibration containers compact without meaningful loss (the
/// response is smooth at the fine-sweep scale).
inline MonotoneResponse resample_response(const MonotoneResponse& response,
                                          std::size_t max_knots) {
  if (response.xs.size() <= max_knots) return response;
  const std::size_t n = max_knots;
  std::vector<double> xs(n), ys(n);
  const double lo = response.x_lo(), hi = response.x_hi();
  for (std::size_t j = 0; j < n; ++j) {
    xs[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
    ys[j] = response.value(std::min(xs[j], hi));
  }
  SplineSystem sys(xs);
  const SplineFitResult fit = fit_spline(sys, ys, 0.0);
  MonotoneResponse out;
  out.xs = std::move(xs);
  out.ys = fit.g;
  out.m2 = fit.m2;
  out.smoothing = response.smoothing;
  return out;
}

}  // namespace detail

/// Full calibration procedure against a homogeneous plane at target_depth:
/// coarse 512-step sweep, per-pixel plateau / zero-equivalent / interval
/// estimation, one fine sweep over the union of the pixel intervals,
/// per-pixel monotone response fits on their own interval slice, zero
/// phases, and the median-referenced mask. Per-pixel failures mark the
/// pixel invalid; more than 20% invalid raises CalibrationError.
inline CalibrationTable build_calibration(double target_depth,
                                          const AcquisitionConfig& acq,
                                          int width, int height,
                                          std::size_t max_response_knots = 65) {
  if (!acq.coding.is_pulsed())
    throw UnsupportedCodingError("build_calibration: requires pulsed coding");
  acq.validate_for(width, height);
  const double range = acq.coding.unambiguity_range();
  if (!std::isfinite(target_depth) || target_depth <= 0.0 || target_depth >= range)
    throw DomainError("build_calibration: reference depth outside (0, range)");
  const SceneFrame plane =
      make_plane(target_depth, 1.0, 0.0, width, height, range);
  const std::size_t n = plane.pixel_count();

  const SweepRecord coarse = coarse_sweep(plane, acq, 512);
  const double hint =
      wrap_two_pi(phase_from_depth(target_depth, acq.coding.omega()) - pi / 2.0);

  struct Stage1 {
    bool ok = false;
    Plateaus plateaus;
    double ze = 0.0;
    PhaseInterval interval;
  };
  std::vector<Stage1> stage1(n);
  parallel_for(n, [&](std::size_t p) {
    try {
      Stage1 s;
      s.plateaus = estimate_plateaus(coarse, p);
      s.ze = zero_equivalent(s.plateaus.hi, s.plateaus.lo);
      s.interval = estimate_sensitive_interval(coarse, p, s.plateaus, hint);
      const double mid = 0.5 * (s.interval.lo + s.interval.hi);
      const double shift = two_pi * std::round((mid - hint) / two_pi);
      s.interval.lo -= shift;
      s.interval.hi -= shift;
      s.ok = true;
      stage1[p] = s;
    } catch (const std::exception&) {
      stage1[p].ok = false;
    }
  });

  PhaseInterval hull{std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()};
  for (const auto& s : stage1) {
    if (!s.ok) continue;
    hull.lo = std::min(hull.lo, s.interval.lo);
    hull.hi = std::max(hull.hi, s.interval.hi);
  }
  if (!(hull.hi > hull.lo))
    throw CalibrationError("build_calibration: no pixel produced a sensitive interval");

  const SweepRecord fine = fine_sweep(plane, acq, hull);

  CalibrationTable table;
  table.width = width;
  table.height = height;
  table.reference_depth = target_depth;
  table.coding = acq.coding;
  table.seed = acq.seed;
  {
    nlohmann::json fp{{"acquisition", acq},
                      {"width", width},
                      {"height", height},
                      {"reference_depth", target_depth}};
    table.config_fingerprint = json_fingerprint(fp);
  }
  table.pixels.assign(n, PixelCalibration{});
  table.mask.assign(n, 0.0);

  parallel_for(n, [&](std::size_t p) {
    const Stage1& s = stage1[p];
    if (!s.ok) return;
    try {
      SampledCurve curve;
      for (std::size_t j = 0; j < fine.sample_count(); ++j) {
        const double theta = fine.theta_g[j];
        if (theta < s.interval.lo - 1e-12 || theta > s.interval.hi + 1e-12)
          continue;
        if (!fine.valid[j][p]) continue;
        curve.xs.push_back(theta);
        curve.ys.push_back(fine.psi[j][p]);
      }
      MonotoneResponse response = detail::resample_response(
          fit_monotone_response(curve), max_response_knots);
      PixelCalibration& pc = table.pixels[p];
      pc.plateau_hi = s.plateaus.hi;
      pc.plateau_lo = s.plateaus.lo;
      pc.zero_equiv = s.ze;
      pc.zero_phase = invert_monotone(response, s.ze);
      pc.interval = {response.x_lo(), response.x_hi()};
      pc.response = std::move(response);
      pc.valid = true;
    } catch (const std::exception&) {
      table.pixels[p].valid = false;
    }
  });

  const std::size_t valid = table.valid_count();
  if (n - valid > n / 5)
    throw CalibrationError(
        "build_calibration: " + std::to_string(100.0 * (n - valid) / n) +
        "% of pixels failed calibration");

  std::vector<double> zero_phases;
  zero_phases.reserve(valid);
  for (const auto& p : table.pixels)
    if (p.valid) zero_phases.push_back(p.zero_phase);
  const double med = lower_median_of(zero_phases);
  for (std::size_t p = 0; p < n; ++p)
    if (table.pixels[p].valid) table.mask[p] = table.pixels[p].zero_phase - med;
  return table;
}

/// Phase offset of a measurement from the table's reference: inverts the
/// pixel's response at the observed raw fraction and removes the pixel's
/// mask correction. Raw fractions outside the response range raise
/// OutOfSensitiveRangeError (the depth is outside the sensitive range).
inline double measure_offset(double psi, std::size_t pixel,
                             const CalibrationTable& table) {
  if (pixel >= table.pixels.size())
    throw DomainError("measure_offset: pixel out of range");
  const PixelCalibration& pc = table.pixels[pixel];
  if (!pc.valid) throw DomainError("measure_offset: pixel not calibrated");
  const double theta_inv = invert_monotone(pc.response, psi);
  return wrap_pm_pi(pc.zero_phase - theta_inv) - table.mask[pixel];
}

namespace detail {

inline void put_u8(std::string& out, std::uint8_t v) {
  out.push_back(static_cast<char>(v));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(out, u);
}

struct ByteReader {
  const std::string* bytes;
  std::size_t pos = 0;
  std::string path;

  void need(std::size_t count) const {
    if (pos + count > bytes->size())
      throw FormatError(path + ": truncated at byte " + std::to_string(pos) +
                        " (need " + std::to_string(count) + " more)");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>((*bytes)[pos++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>((*bytes)[pos++]))
           << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>((*bytes)[pos++]))
           << (8 * i);
    return v;
  }
  double f64() {
    const std::uint64_t u = u64();
    double v;
    std::memcpy(&v, &u, 8);
    return v;
  }
};

}  // namespace detail

/// Versioned binary container, little-endian throughout:
///   magic "PCTOFCAL" | u32 version | u32 header_len | header JSON |
///   per-pixel records | mask f64[w*h] | u64 FNV-1a of everything above.
/// A pixel record is u8 valid, then for valid pixels 7 f64 scalars
/// (plateaus, zero equivalent, zero phase, interval bounds, smoothing),
/// u32 knot count and f64 xs/ys/m2 arrays. Doubles round-trip bit-exactly.
inline void save_calibration(const std::string& path, const CalibrationTable& table) {
  table.validate();
  std::string out = "PCTOFCAL";
  detail::put_u32(out, 1);
  nlohmann::json header{{"format", "pctof-calibration"},
                        {"width", table.width},
                        {"height", table.height},
                        {"reference_depth", table.reference_depth},
                        {"seed", table.seed},
                        {"config_fingerprint", table.config_fingerprint},
                        {"coding", table.coding}};
  const std::string header_bytes = header.dump();
  detail::put_u32(out, static_cast<std::uint32_t>(header_bytes.size()));
  out += header_bytes;
  for (const auto& p : table.pixels) {
    detail::put_u8(out, p.valid ? 1 : 0);
    if (!p.valid) continue;
    detail::put_f64(out, p.plateau_hi);
    detail::put_f64(out, p.plateau_lo);
    detail::put_f64(out, p.zero_equiv);
    detail::put_f64(out, p.zero_phase);
    detail::put_f64(out, p.interval.lo);
    detail::put_f64(out, p.interval.hi);
    detail::put_f64(out, p.response.smoothing);
    detail::put_u32(out, static_cast<std::uint32_t>(p.response.xs.size()));
    for (double v : p.response.xs) detail::put_f64(out, v);
    for (double v : p.response.ys) detail::put_f64(out, v);
    for (double v : p.response.m2) detail::put_f64(out, v);
  }
  for (double v : table.mask) detail::put_f64(out, v);
  detail::put_u64(out, fnv1a64(out));
  detail::write_file_bytes(path, out);
}

inline CalibrationTable load_calibration(const std::string& path) {
  const std::string bytes = detail::read_file_bytes(path);
  detail::ByteReader r{&bytes, 0, path};
  r.need(8);
  if (bytes.compare(0, 8, "PCTOFCAL") != 0)
    throw FormatError(path + ": bad magic at byte 0 (not a calibration container)");
  r.pos = 8;
  const std::uint32_t version = r.u32();
  if (version != 1)
    throw FormatError(path + ": unsupported container version " +
                      std::to_string(version));
  const std::uint32_t header_len = r.u32();
  r.need(header_len);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(r.pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": header JSON at byte " + std::to_string(r.pos) +
                      ": " + e.what());
  }
  r.pos += header_len;

  CalibrationTable table;
  try {
    if (header.at("format").get<std::string>() != "pctof-calibration")
      throw FormatError(path + ": wrong container format tag");
    table.width = header.at("width").get<int>();
    table.height = header.at("height").get<int>();
    table.reference_depth = header.at("reference_depth").get<double>();
    table.seed = header.at("seed").get<std::uint64_t>();
    table.config_fingerprint = header.at("config_fingerprint").get<std::string>();
    table.coding = header.at("coding").get<CodingConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": header fields: " + e.what());
  }
  if (table.width <= 0 || table.height <= 0)
    throw FormatError(path + ": non-positive dimensions in header");

  const std::size_t n = table.pixel_count();
  table.pixels.assign(n, PixelCalibration{});
  for (std::size_t p = 0; p < n; ++p) {
    PixelCalibration& pc = table.pixels[p];
    pc.valid = r.u8() != 0;
    if (!pc.valid) continue;
    pc.plateau_hi = r.f64();
    pc.plateau_lo = r.f64();
    pc.zero_equiv = r.f64();
    pc.zero_phase = r.f64();
    pc.interval.lo = r.f64();
    pc.interval.hi = r.f64();
    pc.response.smoothing = r.f64();
    const std::uint32_t knots = r.u32();
    if (knots < 2 || knots > 1000000)
      throw FormatError(path + ": implausible knot count at byte " +
                        std::to_string(r.pos - 4));
    pc.response.xs.resize(knots);
    pc.response.ys.resize(knots);
    pc.response.m2.resize(knots);
    for (auto& v : pc.response.xs) v = r.f64();
    for (auto& v : pc.response.ys) v = r.f64();
    for (auto& v : pc.response.m2) v = r.f64();
  }
  table.mask.resize(n);
  for (auto& v : table.mask) v = r.f64();
  const std::size_t body_end = r.pos;
  const std::uint64_t stored = r.u64();
  const std::uint64_t actual = fnv1a64(bytes.data(), body_end);
  if (stored != actual)
    throw FormatError(path + ": checksum mismatch at byte " +
                      std::to_string(body_end));
  if (r.pos != bytes.size())
    throw FormatError(path + ": " + std::to_string(bytes.size() - r.pos) +
                      " trailing bytes after checksum");
  table.validate();
  return table;
}

}  // namespace pctof
