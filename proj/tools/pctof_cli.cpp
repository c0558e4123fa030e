// pctof: command-line laboratory for pulsed-correlation time-of-flight
// imaging. Subcommands cover the full loop: simulate raw tap frames,
// calibrate the per-pixel response, measure depth maps (global sinusoid
// pass + local calibrated pass), validate a calibration on a depth rail,
// and compare coding modes statistically.
//
// Exit codes: 0 ok, 2 configuration, 3 calibration, 4 file I/O, 1 other.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pctof/pctof.hpp"

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct SceneConfig {
  std::string preset = "plane";  // plane | stairs | ramp | file
  double depth_m = 5.0;          // plane depth / stairs base / ramp base
  double albedo = 1.0;
  double ambient = 0.0;
  double step_height_m = 0.005;
  int n_steps = 4;
  int step_width_px = 32;
  double rise_m = 0.05;
  int run_px = 120;
  std::string path;  // CSV basepath for preset "file"
};

struct RailConfig {
  double min_m = -0.025;
  double max_m = 0.025;
  double step_m = 0.001;
};

struct CompareConfig {
  std::vector<double> noise_rel = {0.0, 0.001, 0.003, 0.01};
  int trials = 8;
};

struct CliConfig {
  int width = 160;
  int height = 120;
  double frequency_hz = 1.0e7;
  double pulse_fwhm_s = 5.0e-10;
  double demod_sigma_rad = 0.0774;
  double exposure_s = 1.0e-3;
  pctof::NoiseModel noise;
  std::uint64_t seed = 1;
  double doi_m = 5.0;
  std::string mode = "pulsed";  // pulsed | sinusoid
  SceneConfig scene;
  std::string out_dir = "out";
  RailConfig rail;
  CompareConfig compare;
};

void check_known_keys(const nlohmann::json& j, const char* where,
                      std::initializer_list<const char*> known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw pctof::ConfigError(std::string("config: unknown key \"") + it.key() +
                               "\" in " + where);
  }
}

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

CliConfig load_config(const std::string& path) {
  CliConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw pctof::IoError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw pctof::ConfigError("config: " + path + ": " + e.what());
  }
  try {
    check_known_keys(j, "top level",
                     {"version", "resolution", "frequency_hz", "pulse_fwhm_s",
                      "demod_sigma_rad", "exposure_s", "noise", "seed", "doi_m",
                      "mode", "scene", "out_dir", "rail", "compare"});
    if (j.contains("version") && j.at("version").get<int>() != 1)
      throw pctof::ConfigError("config: unsupported version");
    if (j.contains("resolution")) {
      const auto& r = j.at("resolution");
      check_known_keys(r, "resolution", {"width", "height"});
      maybe(r, "width", cfg.width);
      maybe(r, "height", cfg.height);
    }
    maybe(j, "frequency_hz", cfg.frequency_hz);
    maybe(j, "pulse_fwhm_s", cfg.pulse_fwhm_s);
    maybe(j, "demod_sigma_rad", cfg.demod_sigma_rad);
    maybe(j, "exposure_s", cfg.exposure_s);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      check_known_keys(n, "noise", {"sigma_read", "shot_enabled", "shot_scale"});
      maybe(n, "sigma_read", cfg.noise.sigma_read);
      maybe(n, "shot_enabled", cfg.noise.shot_enabled);
      maybe(n, "shot_scale", cfg.noise.shot_scale);
    }
    maybe(j, "seed", cfg.seed);
    maybe(j, "doi_m", cfg.doi_m);
    maybe(j, "mode", cfg.mode);
    if (j.contains("scene")) {
      const auto& s = j.at("scene");
      check_known_keys(s, "scene",
                       {"preset", "depth_m", "albedo", "ambient", "step_height_m",
                        "n_steps", "step_width_px", "rise_m", "run_px", "path"});
      maybe(s, "preset", cfg.scene.preset);
      maybe(s, "depth_m", cfg.scene.depth_m);
      maybe(s, "albedo", cfg.scene.albedo);
      maybe(s, "ambient", cfg.scene.ambient);
      maybe(s, "step_height_m", cfg.scene.step_height_m);
      maybe(s, "n_steps", cfg.scene.n_steps);
      maybe(s, "step_width_px", cfg.scene.step_width_px);
      maybe(s, "rise_m", cfg.scene.rise_m);
      maybe(s, "run_px", cfg.scene.run_px);
      maybe(s, "path", cfg.scene.path);
    }
    maybe(j, "out_dir", cfg.out_dir);
    if (j.contains("rail")) {
      const auto& r = j.at("rail");
      check_known_keys(r, "rail", {"min_m", "max_m", "step_m"});
      maybe(r, "min_m", cfg.rail.min_m);
      maybe(r, "max_m", cfg.rail.max_m);
      maybe(r, "step_m", cfg.rail.step_m);
    }
    if (j.contains("compare")) {
      const auto& c = j.at("compare");
      check_known_keys(c, "compare", {"noise_rel", "trials"});
      maybe(c, "noise_rel", cfg.compare.noise_rel);
      maybe(c, "trials", cfg.compare.trials);
    }
  } catch (const nlohmann::json::exception& e) {
    throw pctof::ConfigError("config: " + path + ": " + e.what());
  }
  return cfg;
}

nlohmann::json config_to_json(const CliConfig& cfg) {
  return nlohmann::json{
      {"version", 1},
      {"resolution", {{"width", cfg.width}, {"height", cfg.height}}},
      {"frequency_hz", cfg.frequency_hz},
      {"pulse_fwhm_s", cfg.pulse_fwhm_s},
      {"demod_sigma_rad", cfg.demod_sigma_rad},
      {"exposure_s", cfg.exposure_s},
      {"noise", cfg.noise},
      {"seed", cfg.seed},
      {"doi_m", cfg.doi_m},
      {"mode", cfg.mode},
      {"scene",
       {{"preset", cfg.scene.preset},
        {"depth_m", cfg.scene.depth_m},
        {"albedo", cfg.scene.albedo},
        {"ambient", cfg.scene.ambient},
        {"step_height_m", cfg.scene.step_height_m},
        {"n_steps", cfg.scene.n_steps},
        {"step_width_px", cfg.scene.step_width_px},
        {"rise_m", cfg.scene.rise_m},
        {"run_px", cfg.scene.run_px},
        {"path", cfg.scene.path}}},
      {"out_dir", cfg.out_dir},
      {"rail",
       {{"min_m", cfg.rail.min_m},
        {"max_m", cfg.rail.max_m},
        {"step_m", cfg.rail.step_m}}},
      {"compare",
       {{"noise_rel", cfg.compare.noise_rel}, {"trials", cfg.compare.trials}}}};
}

pctof::CodingConfig pulsed_coding(const CliConfig& cfg, double theta_g) {
  const double omega = pctof::two_pi * cfg.frequency_hz;
  const double sigma_m = pctof::fwhm_to_sigma(cfg.pulse_fwhm_s, omega);
  return pctof::CodingConfig::pulsed(cfg.frequency_hz, sigma_m,
                                     cfg.demod_sigma_rad, theta_g, 4,
                                     pctof::AmplitudeConvention::UnitAveragePower);
}

pctof::SceneFrame build_scene(const CliConfig& cfg, double max_depth) {
  const SceneConfig& s = cfg.scene;
  if (s.preset == "plane")
    return pctof::make_plane(s.depth_m, s.albedo, s.ambient, cfg.width, cfg.height,
                             max_depth);
  if (s.preset == "stairs") {
    pctof::SceneFrame f =
        pctof::make_stairs(s.depth_m, s.step_height_m, s.n_steps, s.step_width_px,
                           cfg.width, cfg.height, max_depth);
    for (auto& a : f.albedo) a = s.albedo;
    for (auto& a : f.ambient) a = s.ambient;
    return f;
  }
  if (s.preset == "ramp") {
    pctof::SceneFrame f = pctof::make_ramp(s.depth_m, s.rise_m, s.run_px, cfg.width,
                                           cfg.height, max_depth);
    for (auto& a : f.albedo) a = s.albedo;
    for (auto& a : f.ambient) a = s.ambient;
    return f;
  }
  if (s.preset == "file") {
    if (s.path.empty()) throw pctof::ConfigError("config: scene.path is empty");
    return pctof::load_scene_csv(s.path, max_depth);
  }
  throw pctof::ConfigError("config: unknown scene preset \"" + s.preset + "\"");
}

pctof::AcquisitionConfig build_acq(const CliConfig& cfg,
                                   const pctof::CodingConfig& coding) {
  pctof::AcquisitionConfig acq;
  acq.coding = coding;
  acq.exposure_s = cfg.exposure_s;
  acq.noise = cfg.noise;
  acq.seed = cfg.seed;
  return acq;
}

std::string out_path(const CliConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_manifest(const CliConfig& cfg, const std::string& subcommand,
                    nlohmann::json extra = {}) {
  nlohmann::json config = config_to_json(cfg);
  nlohmann::json m{{"tool", "pctof"},
                   {"tool_version", kToolVersion},
                   {"subcommand", subcommand},
                   {"seed", cfg.seed},
                   {"config", config},
                   {"config_fingerprint", pctof::json_fingerprint(config)}};
  if (!extra.is_null() && !extra.empty()) m["outputs"] = extra;
  std::ofstream out(out_path(cfg, "manifest.json"));
  if (!out) throw pctof::IoError("cannot write manifest.json");
  out << m.dump(2) << "\n";
}

pctof::Plane psi_plane(const pctof::RawFractionFrame& rf) {
  pctof::Plane p = pctof::Plane::constant(
      rf.width, rf.height, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < rf.psi.size(); ++i)
    if (rf.valid[i]) p.data[i] = rf.psi[i];
  return p;
}

// ---------------------------------------------------------------- simulate

int run_simulate(const CliConfig& cfg) {
  const bool pulsed = cfg.mode == "pulsed";
  if (!pulsed && cfg.mode != "sinusoid")
    throw pctof::ConfigError("config: mode must be \"pulsed\" or \"sinusoid\"");
  pctof::CodingConfig coding =
      pulsed ? pulsed_coding(cfg, 0.0) : pctof::CodingConfig::sinusoid(cfg.frequency_hz);
  if (pulsed) coding.theta_g = pctof::doi_to_global_shift(cfg.doi_m, coding);
  const pctof::SceneFrame scene = build_scene(cfg, coding.unambiguity_range());
  const pctof::AcquisitionConfig acq = build_acq(cfg, coding);
  const pctof::TapFrame frame = pctof::render_taps(scene, acq);
  const pctof::RawFractionFrame rf = pctof::raw_fraction(frame);

  pctof::save_scene_csv(out_path(cfg, "scene"), scene);
  pctof::save_taps(out_path(cfg, "taps"), frame);
  pctof::write_plane_csv(out_path(cfg, "psi.csv"), psi_plane(rf));
  std::size_t n_valid = 0;
  for (auto v : rf.valid) n_valid += v ? 1 : 0;
  write_manifest(cfg, "simulate",
                 {{"files",
                   {"scene.depth.csv", "scene.albedo.csv", "scene.ambient.csv",
                    "taps.tap0.csv", "taps.tap1.csv", "taps.tap2.csv",
                    "taps.tap3.csv", "taps.meta.json", "psi.csv"}}});
  std::printf("simulate: %dx%d %s frame, doi %.6g m, psi valid %.1f%%\n", cfg.width,
              cfg.height, cfg.mode.c_str(), cfg.doi_m,
              100.0 * static_cast<double>(n_valid) /
                  static_cast<double>(rf.pixel_count()));
  std::printf("simulate: wrote %s\n", cfg.out_dir.c_str());
  return 0;
}

// --------------------------------------------------------------- calibrate

int run_calibrate(const CliConfig& cfg) {
  const pctof::CodingConfig coding = pulsed_coding(cfg, 0.0);
  const pctof::AcquisitionConfig acq = build_acq(cfg, coding);
  const pctof::CalibrationTable table =
      pctof::build_calibration(cfg.doi_m, acq, cfg.width, cfg.height);
  pctof::save_calibration(out_path(cfg, "calibration.pctofcal"), table);

  // Zero-phase histogram over [0, 2*pi), 64 bins.
  constexpr int kBins = 64;
  std::vector<std::size_t> hist(kBins, 0);
  std::vector<double> widths;
  for (const auto& p : table.pixels) {
    if (!p.valid) continue;
    const double z = pctof::wrap_two_pi(p.zero_phase);
    int b = static_cast<int>(z / pctof::two_pi * kBins);
    if (b >= kBins) b = kBins - 1;
    ++hist[static_cast<std::size_t>(b)];
    widths.push_back(p.interval.width());
  }
  std::string hist_csv = "bin_center_rad,count\n";
  for (int b = 0; b < kBins; ++b) {
    pctof::detail::append_double(hist_csv,
                                 (static_cast<double>(b) + 0.5) / kBins * pctof::two_pi);
    hist_csv += ',';
    hist_csv += std::to_string(hist[static_cast<std::size_t>(b)]);
    hist_csv += '\n';
  }
  pctof::detail::write_file_bytes(out_path(cfg, "zero_phase_hist.csv"), hist_csv);

  const double med_width = pctof::median_of(widths);
  const double depth_width =
      pctof::depth_from_phase(med_width, table.coding.omega());
  const double valid_frac = static_cast<double>(table.valid_count()) /
                            static_cast<double>(table.pixel_count());
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "calibration summary\n"
                "reference_depth_m  %.9g\n"
                "valid_fraction     %.6f\n"
                "median_interval_rad %.9g\n"
                "median_interval_m  %.9g\n"
                "fingerprint        %s\n",
                table.reference_depth, valid_frac, med_width, depth_width,
                table.config_fingerprint.c_str());
  pctof::detail::write_file_bytes(out_path(cfg, "calibration_summary.txt"), buf);
  write_manifest(cfg, "calibrate",
                 {{"files",
                   {"calibration.pctofcal", "zero_phase_hist.csv",
                    "calibration_summary.txt"}},
                  {"calibration_fingerprint", table.config_fingerprint}});
  std::printf("calibrate: reference %.6g m, %zu/%zu pixels valid, median interval "
              "%.4g rad (%.4g m)\n",
              table.reference_depth, table.valid_count(), table.pixel_count(),
              med_width, depth_width);
  std::printf("calibrate: wrote %s\n",
              out_path(cfg, "calibration.pctofcal").c_str());
  return 0;
}

// ----------------------------------------------------------------- measure

int run_measure(const CliConfig& cfg, const std::string& calib_path, bool doi_given) {
  if (calib_path.empty())
    throw pctof::ConfigError("measure: --calibration is required");
  const pctof::CalibrationTable table = pctof::load_calibration(calib_path);
  if (table.width != cfg.width || table.height != cfg.height)
    throw pctof::CompatibilityError(
        "measure: calibration resolution does not match the configuration");

  const pctof::SceneFrame scene =
      build_scene(cfg, table.coding.unambiguity_range());

  // Pass 1: global sinusoid decode to locate the scene.
  pctof::AcquisitionConfig sin_acq =
      build_acq(cfg, pctof::CodingConfig::sinusoid(table.coding.nu));
  sin_acq.seed = pctof::child_seed(cfg.seed, pctof::stream_purpose::trial, 0);
  const pctof::TapFrame sin_frame = pctof::render_taps(scene, sin_acq);
  const pctof::DepthMap coarse = pctof::sinusoid_depth(sin_frame);

  double doi = cfg.doi_m;
  if (!doi_given) {
    std::vector<double> depths;
    for (std::size_t p = 0; p < coarse.pixel_count(); ++p)
      if (coarse.valid[p]) depths.push_back(coarse.depth[p]);
    if (depths.empty())
      throw pctof::EmptyMetricError("measure: coarse pass produced no valid pixels");
    doi = pctof::median_of(depths);
  }

  // Pass 2: calibrated local decode around the depth of interest.
  pctof::CodingConfig fine_coding = table.coding;
  fine_coding.theta_g = pctof::doi_to_global_shift(doi, fine_coding);
  pctof::AcquisitionConfig fine_acq = build_acq(cfg, fine_coding);
  fine_acq.seed = pctof::child_seed(cfg.seed, pctof::stream_purpose::trial, 1);
  const pctof::TapFrame fine_frame = pctof::render_taps(scene, fine_acq);
  const pctof::DepthMap fine = pctof::pctof_depth(fine_frame, table, doi);

  pctof::save_depth_csv(out_path(cfg, "coarse_depth.csv"), coarse);
  pctof::save_depth_csv(out_path(cfg, "fine_depth.csv"), fine);
  pctof::save_depth_pfm(out_path(cfg, "fine_depth.pfm"), fine);
  pctof::save_depth_pgm16(out_path(cfg, "fine_preview.pgm"), fine);
  pctof::Plane diff = pctof::Plane::constant(
      cfg.width, cfg.height, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t p = 0; p < fine.pixel_count(); ++p)
    if (fine.valid[p] && coarse.valid[p])
      diff.data[p] = fine.depth[p] - coarse.depth[p];
  pctof::write_plane_csv(out_path(cfg, "fine_minus_coarse.csv"), diff);

  write_manifest(cfg, "measure",
                 {{"doi_m", doi},
                  {"doi_source", doi_given ? "flag" : "coarse_median"},
                  {"files",
                   {"coarse_depth.csv", "fine_depth.csv", "fine_depth.pfm",
                    "fine_preview.pgm", "fine_minus_coarse.csv"}}});
  std::printf("measure: doi %.6g m (%s), coarse valid %.1f%%, fine valid %.1f%%\n",
              doi, doi_given ? "flag" : "median of coarse pass",
              100.0 * static_cast<double>(coarse.valid_count()) /
                  static_cast<double>(coarse.pixel_count()),
              100.0 * static_cast<double>(fine.valid_count()) /
                  static_cast<double>(fine.pixel_count()));
  std::printf("measure: wrote %s\n", cfg.out_dir.c_str());
  return 0;
}

// ---------------------------------------------------------------- validate

int run_validate(const CliConfig& cfg, const std::string& calib_path) {
  if (calib_path.empty())
    throw pctof::ConfigError("validate: --calibration is required");
  const pctof::CalibrationTable table = pctof::load_calibration(calib_path);
  if (!(cfg.rail.step_m > 0.0) || !(cfg.rail.max_m >= cfg.rail.min_m))
    throw pctof::ConfigError("validate: bad rail range");

  std::vector<double> offsets;
  for (double o = cfg.rail.min_m; o <= cfg.rail.max_m + 1e-12; o += cfg.rail.step_m)
    offsets.push_back(o);

  const double ref = table.reference_depth;
  const pctof::SceneFrame plane = pctof::make_plane(
      ref, 1.0, 0.0, table.width, table.height, table.coding.unambiguity_range());
  pctof::CodingConfig coding = table.coding;
  coding.theta_g = pctof::doi_to_global_shift(ref, coding);
  pctof::AcquisitionConfig acq = build_acq(cfg, coding);
  const std::vector<pctof::TapFrame> frames =
      pctof::rail_sweep(plane, acq, offsets);

  std::string csv = "offset_m,expected_m,mean_m,mean_error_m,valid_fraction,included\n";
  double sq = 0.0;
  std::size_t n_rows = 0, n_excluded = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const pctof::DepthMap map = pctof::pctof_depth(frames[i], table, ref);
    const double expected = ref + offsets[i];
    double mean = std::numeric_limits<double>::quiet_NaN();
    const std::size_t n_valid = map.valid_count();
    const double valid_frac = static_cast<double>(n_valid) /
                              static_cast<double>(map.pixel_count());
    if (n_valid > 0) {
      double s = 0.0;
      for (std::size_t p = 0; p < map.pixel_count(); ++p)
        if (map.valid[p]) s += map.depth[p];
      mean = s / static_cast<double>(n_valid);
    }
    // A rail position counts toward the overall figure only when most of
    // the frame stayed inside the sensitive interval.
    const bool included = valid_frac >= 0.5;
    if (included) {
      sq += (mean - expected) * (mean - expected);
      ++n_rows;
    } else {
      ++n_excluded;
    }
    pctof::detail::append_double(csv, offsets[i]);
    csv += ',';
    pctof::detail::append_double(csv, expected);
    csv += ',';
    pctof::detail::append_double(csv, mean);
    csv += ',';
    pctof::detail::append_double(csv, mean - expected);
    csv += ',';
    pctof::detail::append_double(csv, valid_frac);
    csv += included ? ",1\n" : ",0\n";
  }
  if (n_rows == 0)
    throw pctof::EmptyMetricError("validate: no rail position was measurable");
  const double rms = std::sqrt(sq / static_cast<double>(n_rows));
  pctof::detail::write_file_bytes(out_path(cfg, "rail_validation.csv"), csv);
  write_manifest(cfg, "validate",
                 {{"files", {"rail_validation.csv"}},
                  {"rail_rms_m", rms},
                  {"positions", offsets.size()},
                  {"excluded", n_excluded}});
  std::printf("validate: %zu rail positions, %zu excluded (out of sensitive "
              "range), mean-error rms %.4g mm\n",
              offsets.size(), n_excluded, rms * 1e3);
  std::printf("validate: wrote %s\n", out_path(cfg, "rail_validation.csv").c_str());
  return n_rows == 0 ? 3 : 0;
}

// ----------------------------------------------------------------- compare

int run_compare(const CliConfig& cfg) {
  const pctof::CodingConfig pulsed = pulsed_coding(cfg, 0.0);
  const pctof::CodingConfig sinus = pctof::CodingConfig::sinusoid(cfg.frequency_hz);
  const pctof::SceneFrame scene = build_scene(cfg, pulsed.unambiguity_range());

  // Noise levels are configured relative to the noise-free sinusoid tap
  // span on this scene, so "0.01" means 1% of full signal swing.
  pctof::AcquisitionConfig probe = build_acq(cfg, sinus);
  probe.noise = pctof::NoiseModel{};
  const pctof::TapFrame probe_frame = pctof::render_taps(scene, probe);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& tap : probe_frame.taps)
    for (double v : tap) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double span = hi - lo;
  if (!(span > 0.0))
    throw pctof::DomainError("compare: degenerate scene, zero tap span");
  std::vector<double> sigmas;
  for (double rel : cfg.compare.noise_rel) sigmas.push_back(rel * span);

  const pctof::PrecisionReport report = pctof::compare_modes(
      scene, cfg.doi_m, cfg.exposure_s, sigmas,
      {{"pctof", pulsed}, {"sinusoid", sinus}}, cfg.compare.trials, cfg.seed);

  pctof::write_report_csv(out_path(cfg, "comparison.csv"), report);
  pctof::write_modes_csv(out_path(cfg, "modes.csv"), report);
  pctof::write_report_text(out_path(cfg, "comparison.txt"), report);
  for (const auto& m : report.modes)
    pctof::write_profile_csv(out_path(cfg, "profile_" + m.name + ".csv"), m.profile);
  write_manifest(cfg, "compare",
                 {{"files",
                   {"comparison.csv", "modes.csv", "comparison.txt",
                    "profile_pctof.csv", "profile_sinusoid.csv"}},
                  {"tap_span", span},
                  {"noise_sigmas", sigmas}});

  std::printf("compare: %d trials per row, tap span %.6g\n", cfg.compare.trials,
              span);
  std::printf("%-12s %14s %14s %14s %10s\n", "mode", "noise_sigma", "rms_doi_mm",
              "rms_full_mm", "valid");
  for (const auto& r : report.rows)
    std::printf("%-12s %14.6g %14.6g %14.6g %10.4f\n", r.mode.c_str(),
                r.noise_sigma, r.rms_doi * 1e3, r.rms_full * 1e3, r.valid_fraction);
  std::printf("compare: wrote %s\n", cfg.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pctof: pulsed-correlation time-of-flight laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, calib_path;
  std::string out_override, scene_override, mode_override;
  std::uint64_t seed_override = 0;
  double doi_override = 0.0, noise_override = 0.0;
  app.add_option("--config", config_path, "JSON configuration file");
  auto* opt_out = app.add_option("--out", out_override, "output directory");
  auto* opt_seed = app.add_option("--seed", seed_override, "base RNG seed");
  auto* opt_doi = app.add_option("--doi", doi_override, "depth of interest [m]");
  auto* opt_noise =
      app.add_option("--noise", noise_override, "read noise sigma override");
  auto* opt_scene = app.add_option(
      "--scene", scene_override, "scene preset override (plane|stairs|ramp|file)");
  auto* opt_mode =
      app.add_option("--mode", mode_override, "coding mode (pulsed|sinusoid)");

  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "render a tap frame for a synthetic scene");
  CLI::App* cmd_calibrate = app.add_subcommand(
      "calibrate", "sweep the demodulation shift and fit the per-pixel response");
  CLI::App* cmd_measure = app.add_subcommand(
      "measure", "two-pass depth measurement (sinusoid locate + calibrated refine)");
  CLI::App* cmd_validate = app.add_subcommand(
      "validate", "check a calibration against known rail displacements");
  CLI::App* cmd_compare =
      app.add_subcommand("compare", "statistical comparison of coding modes");
  cmd_measure->add_option("--calibration", calib_path, "calibration container");
  cmd_validate->add_option("--calibration", calib_path, "calibration container");

  CLI11_PARSE(app, argc, argv);

  try {
    CliConfig cfg = load_config(config_path);
    if (*opt_out) cfg.out_dir = out_override;
    if (*opt_seed) cfg.seed = seed_override;
    if (*opt_doi) cfg.doi_m = doi_override;
    if (*opt_noise) cfg.noise.sigma_read = noise_override;
    if (*opt_scene) cfg.scene.preset = scene_override;
    if (*opt_mode) cfg.mode = mode_override;

    if (cmd_simulate->parsed()) return run_simulate(cfg);
    if (cmd_calibrate->parsed()) return run_calibrate(cfg);
    if (cmd_measure->parsed()) return run_measure(cfg, calib_path, !!*opt_doi);
    if (cmd_validate->parsed()) return run_validate(cfg, calib_path);
    if (cmd_compare->parsed()) return run_compare(cfg);
    std::fprintf(stderr, "error: no subcommand\n");
    return 2;
  } catch (const pctof::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pctof::CalibrationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const pctof::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const pctof::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
