#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pctof/errors.hpp"
#include "pctof/image_io.hpp"

namespace pctof {

/// Ground-truth scene: per-pixel depth, modulated-irradiance scale
/// (albedo) and ambient level. Depth is stored as authored values plus an
/// accumulated rail offset so translating by +d and then -d restores the
/// original frame bit for bit.
struct SceneFrame {
  int width = 0;
  int height = 0;
  std::vector<double> depth_base;  // authored depth [m]
  double depth_offset = 0.0;       // accumulated translation [m]
  std::vector<double> albedo;
  std::vector<double> ambient;
  double max_depth = 0.0;  // exclusive upper bound, the unambiguity range

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
  double depth_at(std::size_t p) const { return depth_base[p] + depth_offset; }

  void validate() const {
    if (width <= 0 || height <= 0)
      throw DomainError("SceneFrame: dimensions must be positive");
    const std::size_t n = pixel_count();
    if (depth_base.size() != n || albedo.size() != n || ambient.size() != n)
      throw DomainError("SceneFrame: map size does not match dimensions");
    if (!(max_depth > 0.0))
      throw DomainError("SceneFrame: max_depth must be positive");
    for (std::size_t p = 0; p < n; ++p) {
      const double d = depth_at(p);
      if (!std::isfinite(d) || d < 0.0 || d >= max_depth)
        throw DomainError("SceneFrame: depth outside [0, max_depth)");
      if (!std::isfinite(albedo[p]) || albedo[p] < 0.0)
        throw DomainError("SceneFrame: negative albedo");
      if (!std::isfinite(ambient[p]) || ambient[p] < 0.0)
        throw DomainError("SceneFrame: negative ambient");
    }
  }
};

namespace detail {

inline SceneFrame scene_shell(double albedo, double ambient, int width,
                              int height, double max_depth) {
  if (width <= 0 || height <= 0)
    throw DomainError("scene: dimensions must be positive");
  if (!(max_depth > 0.0)) throw DomainError("scene: max_depth must be positive");
  if (!(albedo >= 0.0)) throw DomainError("scene: albedo must be >= 0");
  if (!(ambient >= 0.0)) throw DomainError("scene: ambient must be >= 0");
  SceneFrame s;
  s.width = width;
  s.height = height;
  s.max_depth = max_depth;
  const std::size_t n = s.pixel_count();
  s.depth_base.assign(n, 0.0);
  s.albedo.assign(n, albedo);
  s.ambient.assign(n, ambient);
  return s;
}

}  // namespace detail

inline SceneFrame make_plane(double depth, double albedo, double ambient,
                             int width, int height, double max_depth) {
  SceneFrame s = detail::scene_shell(albedo, ambient, width, height, max_depth);
  std::fill(s.depth_base.begin(), s.depth_base.end(), depth);
  s.validate();
  return s;
}

/// Staircase along the horizontal axis: n_steps bands of step_width_px
/// columns at base + i*step_height (i = 0 .. n_steps-1), remaining columns
/// to the right form the top landing at base + n_steps*step_height. With
/// zero steps the frame is a plane at base_depth.
inline SceneFrame make_stairs(double base_depth, double step_height, int n_steps,
                              int step_width_px, int width, int height,
                              double max_depth) {
  if (!(step_height > 0.0))
    throw DomainError("make_stairs: step_height must be positive");
  if (n_steps < 0) throw DomainError("make_stairs: n_steps must be >= 0");
  if (n_steps > 0 && step_width_px <= 0)
    throw DomainError("make_stairs: step_width_px must be positive");
  if (n_steps > 0 &&
      static_cast<long long>(n_steps) * step_width_px > width)
    throw DomainError("make_stairs: steps do not fit the frame width");
  SceneFrame s = detail::scene_shell(1.0, 0.0, width, height, max_depth);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int level =
          n_steps == 0 ? 0 : std::min(x / step_width_px, n_steps);
      s.depth_base[static_cast<std::size_t>(y) * width + x] =
          base_depth + level * step_height;
    }
  s.validate();
  return s;
}

/// Step heights the staircase targets come in.
inline const std::vector<double>& stair_step_presets() {
  static const std::vector<double> presets = {0.001, 0.0015, 0.002, 0.003, 0.005};
  return presets;
}

/// Linear gradient from base_depth to base_depth + rise over the first
/// run_px columns; columns beyond the run stay at base_depth + rise.
inline SceneFrame make_ramp(double base_depth, double rise, int run_px,
                            int width, int height, double max_depth) {
  if (run_px < 1) throw DomainError("make_ramp: run_px must be >= 1");
  SceneFrame s = detail::scene_shell(1.0, 0.0, width, height, max_depth);
  const double denom = run_px > 1 ? static_cast<double>(run_px - 1) : 1.0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = x < run_px ? static_cast<double>(x) / denom : 1.0;
      s.depth_base[static_cast<std::size_t>(y) * width + x] =
          base_depth + rise * t;
    }
  s.validate();
  return s;
}

/// Rail translation: every pixel moves by offset; albedo/ambient keep.
/// Accumulates into depth_offset so opposite translations cancel exactly.
inline SceneFrame translate_depth(const SceneFrame& scene, double offset) {
  scene.validate();
  if (!std::isfinite(offset)) throw DomainError("translate_depth: non-finite offset");
  SceneFrame out = scene;
  out.depth_offset = scene.depth_offset + offset;
  double lo = out.depth_base[0], hi = out.depth_base[0];
  for (double d : out.depth_base) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  if (lo + out.depth_offset < 0.0)
    throw DomainError("translate_depth: depth would fall below 0");
  if (hi + out.depth_offset >= out.max_depth)
    throw DomainError("translate_depth: depth would reach max_depth");
  return out;
}

/// Materialized per-pixel depth (base + offset) as an image plane.
inline Plane depth_plane(const SceneFrame& scene) {
  scene.validate();
  Plane p = Plane::constant(scene.width, scene.height, 0.0);
  for (std::size_t i = 0; i < scene.pixel_count(); ++i) p.data[i] = scene.depth_at(i);
  return p;
}

inline SceneFrame scene_from_planes(const Plane& depth, const Plane& albedo,
                                    const Plane& ambient, double max_depth) {
  depth.validate();
  if (!depth.same_shape(albedo) || !depth.same_shape(ambient))
    throw DomainError("scene_from_planes: shape mismatch");
  SceneFrame s;
  s.width = depth.width;
  s.height = depth.height;
  s.max_depth = max_depth;
  s.depth_base = depth.data;
  s.albedo = albedo.data;
  s.ambient = ambient.data;
  s.validate();
  return s;
}

/// Three-file CSV export: basepath + ".depth.csv" / ".albedo.csv" /
/// ".ambient.csv".
inline void save_scene_csv(const std::string& basepath, const SceneFrame& scene) {
  scene.validate();
  write_plane_csv(basepath + ".depth.csv", depth_plane(scene));
  Plane alb = Plane::constant(scene.width, scene.height, 0.0);
  alb.data = scene.albedo;
  Plane amb = Plane::constant(scene.width, scene.height, 0.0);
  amb.data = scene.ambient;
  write_plane_csv(basepath + ".albedo.csv", alb);
  write_plane_csv(basepath + ".ambient.csv", amb);
}

inline SceneFrame load_scene_csv(const std::string& basepath, double max_depth) {
  const Plane depth = read_plane_csv(basepath + ".depth.csv");
  const Plane alb = read_plane_csv(basepath + ".albedo.csv");
  const Plane amb = read_plane_csv(basepath + ".ambient.csv");
  return scene_from_planes(depth, alb, amb, max_depth);
}

inline void save_scene_pfm(const std::string& basepath, const SceneFrame& scene) {
  scene.validate();
  write_plane_pfm(basepath + ".depth.pfm", depth_plane(scene));
  Plane alb = Plane::constant(scene.width, scene.height, 0.0);
  alb.data = scene.albedo;
  Plane amb = Plane::constant(scene.width, scene.height, 0.0);
  amb.data = scene.ambient;
  write_plane_pfm(basepath + ".albedo.pfm", alb);
  write_plane_pfm(basepath + ".ambient.pfm", amb);
}

}  // namespace pctof
