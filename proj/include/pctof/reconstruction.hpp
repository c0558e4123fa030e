#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pctof/acquisition.hpp"
#include "pctof/calibration.hpp"
#include "pctof/constants.hpp"
#include "pctof/errors.hpp"
#include "pctof/image_io.hpp"
#include "pctof/scene.hpp"
#include "pctof/signal_model.hpp"

namespace pctof {

enum class DepthMode { Sinusoid, PcTof };

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;         // meters; unspecified where invalid
  std::vector<std::uint8_t> valid;
  DepthMode mode = DepthMode::Sinusoid;

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  std::size_t valid_count() const {
    std::size_t c = 0;
    for (auto v : valid) c += v ? 1 : 0;
    return c;
  }
  void validate() const {
    if (width <= 0 || height <= 0) throw DomainError("DepthMap: empty frame");
    if (depth.size() != pixel_count() || valid.size() != pixel_count())
      throw DomainError("DepthMap: plane size mismatch");
    for (std::size_t p = 0; p < depth.size(); ++p)
      if (valid[p] && (!std::isfinite(depth[p]) || depth[p] < 0.0))
        throw DomainError("DepthMap: valid pixel with non-finite or negative depth");
  }
};

/// Classic four-tap arctangent decode. Global over the full unambiguity
/// range; precision is uniform in depth. A pixel is invalid only when
/// both quadrature differences vanish (no signal).
///
/// `allow_non_sinusoid` lets the decoder run on pulsed-coding frames to
/// demonstrate the systematic error of applying the sinusoid model there;
/// by default that is rejected.
inline DepthMap sinusoid_depth(const TapFrame& taps, bool allow_non_sinusoid = false) {
  taps.validate();
  const CodingConfig& c = taps.config.coding;
  if (c.k_taps != 4)
    throw UnsupportedTapCountError("sinusoid_depth: requires exactly 4 taps");
  if (!c.is_sinusoid() && !allow_non_sinusoid)
    throw UnsupportedCodingError("sinusoid_depth: frame was not sinusoid-coded");

  DepthMap map;
  map.width = taps.width;
  map.height = taps.height;
  map.mode = DepthMode::Sinusoid;
  map.depth.assign(taps.pixel_count(), 0.0);
  map.valid.assign(taps.pixel_count(), 0);
  const double eps = raw_fraction_epsilon(taps);
  const double omega = c.omega();
  for (std::size_t p = 0; p < taps.pixel_count(); ++p) {
    const double d02 = taps.taps[0][p] - taps.taps[2][p];
    const double d13 = taps.taps[1][p] - taps.taps[3][p];
    if (std::fabs(d02) < eps && std::fabs(d13) < eps) continue;
    const double phi = wrap_two_pi(std::atan2(d13, d02) + c.theta_g);
    map.depth[p] = depth_from_phase(phi, omega);
    map.valid[p] = 1;
  }
  return map;
}

/// Calibrated PC-ToF decode: per-pixel raw fraction -> inverted response
/// -> phase offset from the depth of interest -> depth. Pixels whose raw
/// fraction falls outside the calibrated sensitive interval come back
/// invalid rather than extrapolated.
inline DepthMap pctof_depth(const TapFrame& taps, const CalibrationTable& table,
                            double doi) {
  taps.validate();
  table.validate();
  if (taps.width != table.width || taps.height != table.height)
    throw CompatibilityError("pctof_depth: frame and calibration resolution differ");
  const CodingConfig& c = taps.config.coding;
  if (!c.is_pulsed())
    throw CompatibilityError("pctof_depth: frame is not pulsed-coded");
  if (!c.same_signal_family(table.coding))
    throw CompatibilityError(
        "pctof_depth: frame coding does not match the calibration coding");
  if (!(doi > 0.0) || doi >= c.unambiguity_range())
    throw DomainError("pctof_depth: doi outside the unambiguity range");
  const double expected_shift = doi_to_global_shift(doi, c);
  if (std::fabs(circular_delta(c.theta_g, expected_shift)) > 1e-9)
    throw CompatibilityError(
        "pctof_depth: frame global shift does not target the given doi");

  const RawFractionFrame rf = raw_fraction(taps);
  DepthMap map;
  map.width = taps.width;
  map.height = taps.height;
  map.mode = DepthMode::PcTof;
  map.depth.assign(taps.pixel_count(), 0.0);
  map.valid.assign(taps.pixel_count(), 0);
  const double phase_to_depth = c.unambiguity_range() / two_pi;
  for (std::size_t p = 0; p < taps.pixel_count(); ++p) {
    if (!rf.valid[p] || !table.pixels[p].valid) continue;
    double offset;
    try {
      offset = measure_offset(rf.psi[p], p, table);
    } catch (const OutOfSensitiveRangeError&) {
      continue;
    }
    const double d = doi + offset * phase_to_depth;
    if (d < 0.0 || d >= c.unambiguity_range()) continue;
    map.depth[p] = d;
    map.valid[p] = 1;
  }
  return map;
}

struct RmsResult {
  double rms = 0.0;             // meters, over valid pixels
  double valid_fraction = 0.0;  // valid pixels / total
};

inline RmsResult rms_error(const DepthMap& map, const SceneFrame& truth) {
  map.validate();
  truth.validate();
  if (map.width != truth.width || map.height != truth.height)
    throw DomainError("rms_error: resolution mismatch");
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < map.pixel_count(); ++p) {
    if (!map.valid[p]) continue;
    const double e = map.depth[p] - truth.depth_at(p);
    sq += e * e;
    ++n;
  }
  if (n == 0) throw EmptyMetricError("rms_error: no valid pixels");
  return {std::sqrt(sq / static_cast<double>(n)),
          static_cast<double>(n) / static_cast<double>(map.pixel_count())};
}

struct SliceProfile {
  std::vector<double> value;          // per-column mean depth [m]
  std::vector<std::uint8_t> present;  // 0 where no valid pixel in the band
};

/// Per-column mean depth over the row band [row-half_width, row+half_width].
/// The whole band must lie inside the frame.
inline SliceProfile depth_slice(const DepthMap& map, int row, int half_width = 2) {
  map.validate();
  if (half_width < 0) throw DomainError("depth_slice: negative half width");
  if (row - half_width < 0 || row + half_width >= map.height)
    throw DomainError("depth_slice: row band outside the frame");
  SliceProfile s;
  s.value.assign(static_cast<std::size_t>(map.width), 0.0);
  s.present.assign(static_cast<std::size_t>(map.width), 0);
  for (int x = 0; x < map.width; ++x) {
    double sum = 0.0;
    int n = 0;
    for (int y = row - half_width; y <= row + half_width; ++y) {
      const std::size_t p = static_cast<std::size_t>(y) * map.width + x;
      if (!map.valid[p]) continue;
      sum += map.depth[p];
      ++n;
    }
    if (n > 0) {
      s.value[static_cast<std::size_t>(x)] = sum / n;
      s.present[static_cast<std::size_t>(x)] = 1;
    }
  }
  return s;
}

inline Plane depth_plane(const DepthMap& map) {
  map.validate();
  Plane plane = Plane::constant(map.width, map.height,
                                std::numeric_limits<double>::quiet_NaN());
  for (std::size_t p = 0; p < map.pixel_count(); ++p)
    if (map.valid[p]) plane.data[p] = map.depth[p];
  return plane;
}

inline void save_depth_csv(const std::string& path, const DepthMap& map) {
  write_plane_csv(path, depth_plane(map));
}

inline void save_depth_pfm(const std::string& path, const DepthMap& map) {
  write_plane_pfm(path, depth_plane(map));
}

/// 16-bit preview; invalid pixels map to 0 via the NaN rule of the writer.
inline void save_depth_pgm16(const std::string& path, const DepthMap& map) {
  write_plane_pgm16(path, depth_plane(map));
}

}  // namespace pctof
