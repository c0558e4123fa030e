#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pctof/errors.hpp"
#include "pctof/image_io.hpp"
#include "pctof/json_codec.hpp"
#include "pctof/parallel.hpp"
#include "pctof/rng.hpp"
#include "pctof/scene.hpp"
#include "pctof/signal_model.hpp"

namespace pctof {

/// Per-tap noise: additive Gaussian with one sigma shared by all taps
/// (total Omega = sigma_read * sqrt(K)), plus optional Poisson shot noise
/// applied to the pre-read intensity at shot_scale counts per unit.
struct NoiseModel {
  double sigma_read = 0.0;
  bool shot_enabled = false;
  double shot_scale = 1.0;

  bool enabled() const { return sigma_read > 0.0 || shot_enabled; }
  double omega_total(int k_taps) const {
    return sigma_read * std::sqrt(static_cast<double>(k_taps));
  }

  void validate() const {
    if (!std::isfinite(sigma_read) || sigma_read < 0.0)
      throw DomainError("NoiseModel: sigma_read must be >= 0");
    if (!std::isfinite(shot_scale) || shot_scale <= 0.0)
      throw DomainError("NoiseModel: shot_scale must be positive");
  }
};

/// One exposure's worth of acquisition parameters. The optional per-pixel
/// planes perturb the ideal sensor: pixel_phase_offset adds to the signal
/// phase (demodulation path-length spread), pixel_gain scales the
/// modulated component. Empty planes mean an ideal array.
struct AcquisitionConfig {
  CodingConfig coding;
  double exposure_s = 1e-3;
  NoiseModel noise;
  std::uint64_t seed = 0;
  std::vector<double> pixel_phase_offset;  // radians, size 0 or width*height
  std::vector<double> pixel_gain;          // unitless, size 0 or width*height

  double periods() const { return exposure_s * coding.nu; }

  void validate() const {
    coding.validate();
    noise.validate();
    if (!std::isfinite(exposure_s) || exposure_s <= 0.0)
      throw DomainError("AcquisitionConfig: exposure must be positive");
    if (periods() < 1.0)
      throw DomainError("AcquisitionConfig: exposure must cover one period");
  }

  void validate_for(int width, int height) const {
    validate();
    const std::size_t n = static_cast<std::size_t>(width) * height;
    if (!pixel_phase_offset.empty() && pixel_phase_offset.size() != n)
      throw DomainError("AcquisitionConfig: pixel_phase_offset size mismatch");
    if (!pixel_gain.empty() && pixel_gain.size() != n)
      throw DomainError("AcquisitionConfig: pixel_gain size mismatch");
    for (double v : pixel_phase_offset)
      if (!std::isfinite(v))
        throw DomainError("AcquisitionConfig: non-finite phase offset");
    for (double v : pixel_gain)
      if (!std::isfinite(v) || v <= 0.0)
        throw DomainError("AcquisitionConfig: pixel gain must be positive");
  }
};

/// K per-pixel intensity images plus the config that produced them.
struct TapFrame {
  int width = 0;
  int height = 0;
  std::vector<std::vector<double>> taps;  // [tap][pixel]
  AcquisitionConfig config;

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }

  void validate() const {
    if (width <= 0 || height <= 0)
      throw DomainError("TapFrame: dimensions must be positive");
    if (static_cast<int>(taps.size()) != config.coding.k_taps)
      throw DomainError("TapFrame: tap count does not match coding");
    for (const auto& t : taps) {
      if (t.size() != pixel_count())
        throw DomainError("TapFrame: tap image size mismatch");
      for (double v : t)
        if (!std::isfinite(v)) throw DomainError("TapFrame: non-finite intensity");
    }
  }
};

/// Per-pixel raw fraction (I0-I2)/(I1-I3) with a validity flag; invalid
/// exactly where the denominator magnitude falls below epsilon.
struct RawFractionFrame {
  int width = 0;
  int height = 0;
  std::vector<double> psi;
  std::vector<std::uint8_t> valid;
  double epsilon = 0.0;

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

/// Renders the K-tap exposure of a scene: per pixel and tap,
///   I = periods * (albedo * gain * C_tap(phi + beta) + ambient * P / omega)
/// with P the demodulation integral over one period, then shot noise and
/// additive read noise. Noise streams are keyed by (seed, pixel, tap) so
/// the result is independent of worker scheduling.
inline TapFrame render_taps(const SceneFrame& scene, const AcquisitionConfig& acq) {
  scene.validate();
  acq.validate_for(scene.width, scene.height);
  const CodingConfig& coding = acq.coding;
  const double omega = coding.omega();
  const double ambient_corr = demodulation_period_integral(coding) / omega;
  const double periods = acq.periods();
  const int k = coding.k_taps;
  const std::size_t n = scene.pixel_count();

  TapFrame frame;
  frame.width = scene.width;
  frame.height = scene.height;
  frame.config = acq;
  frame.taps.assign(k, std::vector<double>(n, 0.0));

  parallel_for(n, [&](std::size_t p) {
    const double beta =
        acq.pixel_phase_offset.empty() ? 0.0 : acq.pixel_phase_offset[p];
    const double gain = acq.pixel_gain.empty() ? 1.0 : acq.pixel_gain[p];
    const double phi = phase_from_depth(scene.depth_at(p), omega) + beta;
    for (int i = 0; i < k; ++i) {
      const double corr = correlation_value(coding, phi, i);
      double value =
          periods * (scene.albedo[p] * gain * corr + scene.ambient[p] * ambient_corr);
      if (acq.noise.enabled()) {
        NoiseStream stream = NoiseStream::for_cell(acq.seed, p, i);
        if (acq.noise.shot_enabled) {
          const double counts = stream.poisson(value * acq.noise.shot_scale);
          value = counts / acq.noise.shot_scale;
        }
        if (acq.noise.sigma_read > 0.0)
          value += acq.noise.sigma_read * stream.normal();
      }
      frame.taps[i][p] = value;
    }
  });
  return frame;
}

/// Frame-wide denominator guard: 1e-9 of the largest tap magnitude.
inline double raw_fraction_epsilon(const TapFrame& taps) {
  double max_abs = 0.0;
  for (const auto& t : taps.taps)
    for (double v : t) max_abs = std::max(max_abs, std::fabs(v));
  return max_abs > 0.0 ? 1e-9 * max_abs : std::numeric_limits<double>::min();
}

inline RawFractionFrame raw_fraction(const TapFrame& taps) {
  taps.validate();
  if (taps.config.coding.k_taps != 4)
    throw UnsupportedTapCountError("raw_fraction: requires exactly 4 taps");
  RawFractionFrame out;
  out.width = taps.width;
  out.height = taps.height;
  out.epsilon = raw_fraction_epsilon(taps);
  const std::size_t n = taps.pixel_count();
  out.psi.assign(n, 0.0);
  out.valid.assign(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    const double num = taps.taps[0][p] - taps.taps[2][p];
    const double den = taps.taps[1][p] - taps.taps[3][p];
    if (std::fabs(den) < out.epsilon) continue;
    out.psi[p] = num / den;
    out.valid[p] = 1;
  }
  return out;
}

/// One TapFrame per rail offset; frame i renders translate_depth(scene,
/// offsets[i]) under a child seed derived from (base seed, i).
inline std::vector<TapFrame> rail_sweep(const SceneFrame& scene,
                                        const AcquisitionConfig& acq,
                                        const std::vector<double>& offsets) {
  std::vector<TapFrame> frames;
  frames.reserve(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    AcquisitionConfig shot = acq;
    shot.seed = child_seed(acq.seed, stream_purpose::rail, i);
    frames.push_back(render_taps(translate_depth(scene, offsets[i]), shot));
  }
  return frames;
}

inline void to_json(nlohmann::json& j, const NoiseModel& n) {
  j = nlohmann::json{{"sigma_read", n.sigma_read},
                     {"shot_enabled", n.shot_enabled},
                     {"shot_scale", n.shot_scale}};
}

inline void from_json(const nlohmann::json& j, NoiseModel& n) {
  n.sigma_read = j.at("sigma_read").get<double>();
  n.shot_enabled = j.at("shot_enabled").get<bool>();
  n.shot_scale = j.at("shot_scale").get<double>();
}

inline void to_json(nlohmann::json& j, const AcquisitionConfig& a) {
  j = nlohmann::json{{"coding", a.coding},
                     {"exposure_s", a.exposure_s},
                     {"noise", a.noise},
                     {"seed", a.seed}};
}

inline void from_json(const nlohmann::json& j, AcquisitionConfig& a) {
  a.coding = j.at("coding").get<CodingConfig>();
  a.exposure_s = j.at("exposure_s").get<double>();
  a.noise = j.at("noise").get<NoiseModel>();
  a.seed = j.at("seed").get<std::uint64_t>();
}

/// Tap export: basepath + ".tapK.csv" per tap plus ".meta.json"; optional
/// per-pixel planes land in ".phase_offset.csv" / ".gain.csv".
inline void save_taps(const std::string& basepath, const TapFrame& frame) {
  frame.validate();
  nlohmann::json meta{{"format", "pctof-taps"},
                      {"version", 1},
                      {"width", frame.width},
                      {"height", frame.height},
                      {"acquisition", frame.config},
                      {"has_pixel_phase_offset", !frame.config.pixel_phase_offset.empty()},
                      {"has_pixel_gain", !frame.config.pixel_gain.empty()}};
  detail::write_file_bytes(basepath + ".meta.json", meta.dump(2) + "\n");
  for (std::size_t i = 0; i < frame.taps.size(); ++i) {
    Plane p = Plane::constant(frame.width, frame.height, 0.0);
    p.data = frame.taps[i];
    write_plane_csv(basepath + ".tap" + std::to_string(i) + ".csv", p);
  }
  if (!frame.config.pixel_phase_offset.empty()) {
    Plane p = Plane::constant(frame.width, frame.height, 0.0);
    p.data = frame.config.pixel_phase_offset;
    write_plane_csv(basepath + ".phase_offset.csv", p);
  }
  if (!frame.config.pixel_gain.empty()) {
    Plane p = Plane::constant(frame.width, frame.height, 0.0);
    p.data = frame.config.pixel_gain;
    write_plane_csv(basepath + ".gain.csv", p);
  }
}

inline TapFrame load_taps(const std::string& basepath) {
  const std::string meta_path = basepath + ".meta.json";
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(detail::read_file_bytes(meta_path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path + ": " + e.what());
  }
  TapFrame frame;
  try {
    if (meta.at("format").get<std::string>() != "pctof-taps")
      throw FormatError(meta_path + ": not a tap-frame meta file");
    if (meta.at("version").get<int>() != 1)
      throw FormatError(meta_path + ": unsupported version");
    frame.width = meta.at("width").get<int>();
    frame.height = meta.at("height").get<int>();
    frame.config = meta.at("acquisition").get<AcquisitionConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta_path + ": " + e.what());
  }
  const int k = frame.config.coding.k_taps;
  for (int i = 0; i < k; ++i) {
    const std::string path = basepath + ".tap" + std::to_string(i) + ".csv";
    Plane p = read_plane_csv(path);
    if (p.width != frame.width || p.height != frame.height)
      throw FormatError(path + ": dimensions disagree with meta");
    frame.taps.push_back(std::move(p.data));
  }
  if (meta.value("has_pixel_phase_offset", false))
    frame.config.pixel_phase_offset =
        read_plane_csv(basepath + ".phase_offset.csv").data;
  if (meta.value("has_pixel_gain", false))
    frame.config.pixel_gain = read_plane_csv(basepath + ".gain.csv").data;
  frame.validate();
  return frame;
}

}  // namespace pctof
