#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pctof/acquisition.hpp"
#include "pctof/calibration.hpp"
#include "pctof/errors.hpp"
#include "pctof/image_io.hpp"
#include "pctof/reconstruction.hpp"
#include "pctof/rng.hpp"
#include "pctof/scene.hpp"
#include "pctof/signal_model.hpp"

namespace pctof {

/// Root-sum-square depth gradient of the tap correlations at one depth:
/// sqrt(sum_i (dC_i/dGamma)^2) with dC/dGamma = (2 omega / c) dC/dphi.
inline double local_sensitivity(double depth, const CodingConfig& config) {
  config.validate();
  const double omega = config.omega();
  const double phi = phase_from_depth(depth, omega);
  double ss = 0.0;
  for (int i = 0; i < config.k_taps; ++i) {
    const double d = correlation_derivative(config, phi, i);
    ss += d * d;
  }
  return 2.0 * omega / speed_of_light * std::sqrt(ss);
}

/// Depth precision measure: (E_c / (Omega * range)) * integral of the
/// local sensitivity over one unambiguity range. The integrand is smooth
/// and periodic, so the periodic rectangle rule converges fast; the grid
/// is doubled until the result changes by < 1e-6 relative.
inline double depth_precision_measure(const CodingConfig& config, double e_c,
                                      double omega_noise, int grid_n) {
  config.validate();
  if (!(e_c > 0.0)) throw DomainError("depth_precision_measure: e_c must be positive");
  if (!(omega_noise > 0.0))
    throw DomainError("depth_precision_measure: omega_noise must be positive");
  if (grid_n < 1000)
    throw DomainError("depth_precision_measure: grid_n must be at least 1000");
  const double range = config.unambiguity_range();

  std::size_t n = static_cast<std::size_t>(grid_n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    sum += local_sensitivity(range * static_cast<double>(j) / static_cast<double>(n),
                             config);
  double integral = sum * range / static_cast<double>(n);
  const std::size_t max_n = std::size_t{1} << 24;
  while (true) {
    if (n > max_n)
      throw IntegrationError("depth_precision_measure: grid refinement did not converge");
    double odd_sum = 0.0;
    const std::size_t n2 = 2 * n;
    for (std::size_t j = 0; j < n; ++j)
      odd_sum += local_sensitivity(
          range * static_cast<double>(2 * j + 1) / static_cast<double>(n2), config);
    const double refined = 0.5 * integral + odd_sum * range / static_cast<double>(n2);
    const double denom = std::max(std::fabs(refined), 1e-300);
    const bool converged = std::fabs(refined - integral) <= 1e-6 * denom;
    integral = refined;
    n = n2;
    if (converged) break;
  }
  return e_c / (omega_noise * range) * integral;
}

/// Fraction of the sensitivity integral that lies within +-k_sigma edge
/// widths (in phase) of the tap edges. For the pulsed coding the
/// integrand is a row of edge Gaussians, so this approaches erf(k/sqrt 2
/// * sqrt 2)-style concentration; it is the number behind the
/// locality-for-range trade.
inline double sensitivity_concentration(const CodingConfig& config,
                                        double k_sigma = 2.0) {
  detail::require_pulsed(config, "sensitivity_concentration");
  if (!(k_sigma > 0.0))
    throw DomainError("sensitivity_concentration: k_sigma must be positive");
  const double range = config.unambiguity_range();
  const double sigma = config.sigma_eff();
  std::vector<double> edges;
  for (int i = 0; i < config.k_taps; ++i) {
    const auto [rising, falling] = max_sensitivity_phases(config, i);
    edges.push_back(rising);
    edges.push_back(falling);
  }
  const std::size_t n = 1U << 16;
  double total = 0.0, inside = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double depth = range * static_cast<double>(j) / static_cast<double>(n);
    const double phi = phase_from_depth(depth, config.omega());
    const double f = local_sensitivity(depth, config);
    total += f;
    for (double e : edges) {
      if (std::fabs(circular_delta(e, phi)) <= k_sigma * sigma) {
        inside += f;
        break;
      }
    }
  }
  if (total == 0.0) throw EmptyMetricError("sensitivity_concentration: zero profile");
  return inside / total;
}

struct SensitivityProfile {
  std::vector<double> depth;  // meters
  std::vector<double> value;  // per-meter sensitivity
};

inline SensitivityProfile sensitivity_profile(const CodingConfig& config,
                                              std::size_t samples = 512) {
  config.validate();
  if (samples < 2) throw DomainError("sensitivity_profile: need at least 2 samples");
  const double range = config.unambiguity_range();
  SensitivityProfile p;
  p.depth.reserve(samples);
  p.value.reserve(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    const double d = range * static_cast<double>(j) / static_cast<double>(samples);
    p.depth.push_back(d);
    p.value.push_back(local_sensitivity(d, config));
  }
  return p;
}

struct ModeSpec {
  std::string name;
  CodingConfig coding;
};

struct ModeSummary {
  std::string name;
  CodingConfig coding;
  double chi_bar = 0.0;             // at E_c = 1, Omega = 1
  double peak_sensitivity = 0.0;
  double sensitive_fraction = 0.0;  // fraction of range above exp(-2) peak
  SensitivityProfile profile;
};

struct ComparisonRow {
  std::string mode;
  double noise_sigma = 0.0;
  double rms_doi = 0.0;        // over valid pixels with truth near the DOI
  double rms_full = 0.0;       // over all valid pixels
  double valid_fraction = 0.0; // valid pixels / total, full frame
};

struct PrecisionReport {
  double doi = 0.0;
  double exposure_s = 0.0;
  int trials = 0;
  std::vector<ModeSummary> modes;
  std::vector<ComparisonRow> rows;
};

/// Monte-Carlo mode comparison on one scene at equal average optical
/// power: per (mode, noise sigma), n_trials seeded renders are
/// reconstructed (PC-ToF modes against a noise-free calibration built at
/// the DOI) and the squared depth errors pooled across trials. Rows come
/// out sorted by (mode name, noise).
inline PrecisionReport compare_modes(const SceneFrame& scene, double doi,
                                     double exposure_s,
                                     std::vector<double> noise_sigmas,
                                     const std::vector<ModeSpec>& modes,
                                     int n_trials, std::uint64_t seed) {
  scene.validate();
  if (modes.empty()) throw DomainError("compare_modes: no modes given");
  if (noise_sigmas.empty()) throw DomainError("compare_modes: no noise levels given");
  if (n_trials < 1) throw DomainError("compare_modes: need at least one trial");
  for (double s : noise_sigmas)
    if (!std::isfinite(s) || s < 0.0)
      throw DomainError("compare_modes: noise sigma must be >= 0");
  std::sort(noise_sigmas.begin(), noise_sigmas.end());

  PrecisionReport report;
  report.doi = doi;
  report.exposure_s = exposure_s;
  report.trials = n_trials;

  // DOI neighborhood shared by every row: half the sensitive depth width
  // of the first pulsed mode, or the whole range if none is pulsed.
  double doi_halfwidth = 0.0;
  for (const auto& m : modes)
    if (m.coding.is_pulsed()) {
      doi_halfwidth = sensitive_range(m.coding).depth_width / 2.0;
      break;
    }

  for (std::size_t mi = 0; mi < modes.size(); ++mi) {
    const ModeSpec& mode = modes[mi];
    mode.coding.validate();
    // Equal optical budget across rows: the sinusoid coding's period mean
    // is 1/2 by construction, pulsed modes must opt into the matching
    // convention explicitly.
    if (mode.coding.is_pulsed() &&
        mode.coding.modulation.convention != AmplitudeConvention::UnitAveragePower)
      throw DomainError(
          "compare_modes: pulsed modes must use the unit-average-power convention");
    if (doi_halfwidth == 0.0) doi_halfwidth = mode.coding.unambiguity_range();

    ModeSummary summary;
    summary.name = mode.name;
    summary.coding = mode.coding;
    summary.chi_bar = depth_precision_measure(mode.coding, 1.0, 1.0, 1000);
    summary.profile = sensitivity_profile(mode.coding);
    summary.peak_sensitivity =
        *std::max_element(summary.profile.value.begin(), summary.profile.value.end());
    std::size_t above = 0;
    for (double v : summary.profile.value)
      if (v >= std::exp(-2.0) * summary.peak_sensitivity) ++above;
    summary.sensitive_fraction =
        static_cast<double>(above) / static_cast<double>(summary.profile.value.size());
    report.modes.push_back(std::move(summary));

    AcquisitionConfig acq;
    acq.coding = mode.coding;
    acq.exposure_s = exposure_s;
    CalibrationTable table;
    if (mode.coding.is_pulsed()) {
      acq.coding.theta_g = doi_to_global_shift(doi, mode.coding);
      AcquisitionConfig calib_acq = acq;
      calib_acq.noise = NoiseModel{};
      calib_acq.seed = child_seed(seed, stream_purpose::trial,
                                  0xC0000000ull + mi);
      table = build_calibration(doi, calib_acq, scene.width, scene.height);
    } else {
      acq.coding.theta_g = 0.0;
    }

    for (std::size_t ni = 0; ni < noise_sigmas.size(); ++ni) {
      double sq_doi = 0.0, sq_full = 0.0;
      std::size_t n_doi = 0, n_full = 0, n_total = 0;
      for (int t = 0; t < n_trials; ++t) {
        AcquisitionConfig trial = acq;
        trial.noise.sigma_read = noise_sigmas[ni];
        trial.seed = child_seed(
            seed, stream_purpose::trial,
            ((mi & 0xffu) << 40) | ((ni & 0xffu) << 32) | static_cast<unsigned>(t));
        const TapFrame frame = render_taps(scene, trial);
        const DepthMap map = mode.coding.is_pulsed()
                                 ? pctof_depth(frame, table, doi)
                                 : sinusoid_depth(frame);
        for (std::size_t p = 0; p < map.pixel_count(); ++p) {
          ++n_total;
          if (!map.valid[p]) continue;
          const double err = map.depth[p] - scene.depth_at(p);
          sq_full += err * err;
          ++n_full;
          if (std::fabs(scene.depth_at(p) - doi) <= doi_halfwidth) {
            sq_doi += err * err;
            ++n_doi;
          }
        }
      }
      ComparisonRow row;
      row.mode = mode.name;
      row.noise_sigma = noise_sigmas[ni];
      row.rms_doi = n_doi ? std::sqrt(sq_doi / static_cast<double>(n_doi))
                          : std::numeric_limits<double>::quiet_NaN();
      row.rms_full = n_full ? std::sqrt(sq_full / static_cast<double>(n_full))
                            : std::numeric_limits<double>::quiet_NaN();
      row.valid_fraction =
          static_cast<double>(n_full) / static_cast<double>(n_total);
      report.rows.push_back(std::move(row));
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const ComparisonRow& a, const ComparisonRow& b) {
                     if (a.mode != b.mode) return a.mode < b.mode;
                     return a.noise_sigma < b.noise_sigma;
                   });
  return report;
}

inline void write_report_csv(const std::string& path, const PrecisionReport& report) {
  std::string out = "mode,noise_sigma,rms_doi_m,rms_full_m,valid_fraction\n";
  for (const auto& r : report.rows) {
    out += r.mode;
    out += ',';
    detail::append_double(out, r.noise_sigma);
    out += ',';
    detail::append_double(out, r.rms_doi);
    out += ',';
    detail::append_double(out, r.rms_full);
    out += ',';
    detail::append_double(out, r.valid_fraction);
    out += '\n';
  }
  detail::write_file_bytes(path, out);
}

inline void write_modes_csv(const std::string& path, const PrecisionReport& report) {
  std::string out = "mode,chi_bar,peak_sensitivity_per_m,sensitive_fraction\n";
  for (const auto& m : report.modes) {
    out += m.name;
    out += ',';
    detail::append_double(out, m.chi_bar);
    out += ',';
    detail::append_double(out, m.peak_sensitivity);
    out += ',';
    detail::append_double(out, m.sensitive_fraction);
    out += '\n';
  }
  detail::write_file_bytes(path, out);
}

inline void write_profile_csv(const std::string& path, const SensitivityProfile& p) {
  std::string out = "depth_m,sensitivity_per_m\n";
  for (std::size_t j = 0; j < p.depth.size(); ++j) {
    detail::append_double(out, p.depth[j]);
    out += ',';
    detail::append_double(out, p.value[j]);
    out += '\n';
  }
  detail::write_file_bytes(path, out);
}

/// Fixed-width text rendition of the comparison rows.
inline void write_report_text(const std::string& path, const PrecisionReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %14s %14s %14s %10s\n", "mode",
                "noise_sigma", "rms_doi_mm", "rms_full_mm", "valid");
  out += line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof(line), "%-12s %14.6g %14.6g %14.6g %10.4f\n",
                  r.mode.c_str(), r.noise_sigma, r.rms_doi * 1e3, r.rms_full * 1e3,
                  r.valid_fraction);
    out += line;
  }
  detail::write_file_bytes(path, out);
}

}  // namespace pctof
