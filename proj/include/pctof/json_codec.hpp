#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "pctof/errors.hpp"
#include "pctof/signal_model.hpp"

namespace pctof {

inline const char* modulation_kind_name(ModulationKind k) {
  return k == ModulationKind::GaussianPulseTrain ? "gaussian_pulse_train"
                                                 : "sinusoid";
}

inline const char* demodulation_kind_name(DemodulationKind k) {
  return k == DemodulationKind::SmoothedRect ? "smoothed_rect" : "sinusoid";
}

inline const char* amplitude_convention_name(AmplitudeConvention c) {
  return c == AmplitudeConvention::UnitAmplitude ? "unit_amplitude"
                                                 : "unit_average_power";
}

inline ModulationKind parse_modulation_kind(const std::string& s) {
  if (s == "gaussian_pulse_train") return ModulationKind::GaussianPulseTrain;
  if (s == "sinusoid") return ModulationKind::Sinusoid;
  throw ConfigError("unknown modulation kind: '" + s + "'");
}

inline DemodulationKind parse_demodulation_kind(const std::string& s) {
  if (s == "smoothed_rect") return DemodulationKind::SmoothedRect;
  if (s == "sinusoid") return DemodulationKind::Sinusoid;
  throw ConfigError("unknown demodulation kind: '" + s + "'");
}

inline AmplitudeConvention parse_amplitude_convention(const std::string& s) {
  if (s == "unit_amplitude") return AmplitudeConvention::UnitAmplitude;
  if (s == "unit_average_power") return AmplitudeConvention::UnitAveragePower;
  throw ConfigError("unknown amplitude convention: '" + s + "'");
}

inline void to_json(nlohmann::json& j, const CodingConfig& c) {
  j = nlohmann::json{
      {"nu", c.nu},
      {"k_taps", c.k_taps},
      {"theta_g", c.theta_g},
      {"modulation",
       {{"kind", modulation_kind_name(c.modulation.kind)},
        {"sigma_m", c.modulation.sigma_m},
        {"convention", amplitude_convention_name(c.modulation.convention)}}},
      {"demodulation",
       {{"kind", demodulation_kind_name(c.demodulation.kind)},
        {"sigma_d", c.demodulation.sigma_d}}}};
}

inline void from_json(const nlohmann::json& j, CodingConfig& c) {
  c.nu = j.at("nu").get<double>();
  c.k_taps = j.at("k_taps").get<int>();
  c.theta_g = j.at("theta_g").get<double>();
  const auto& m = j.at("modulation");
  c.modulation.kind = parse_modulation_kind(m.at("kind").get<std::string>());
  c.modulation.sigma_m = m.at("sigma_m").get<double>();
  c.modulation.convention =
      parse_amplitude_convention(m.at("convention").get<std::string>());
  const auto& d = j.at("demodulation");
  c.demodulation.kind = parse_demodulation_kind(d.at("kind").get<std::string>());
  c.demodulation.sigma_d = d.at("sigma_d").get<double>();
}

/// FNV-1a over a byte string; used to fingerprint configs in manifests and
/// calibration containers.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t seed = 14695981039346656037ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  return fnv1a64(s.data(), s.size());
}

/// Stable hex fingerprint of a JSON value (keys serialize sorted).
inline std::string json_fingerprint(const nlohmann::json& j) {
  const std::uint64_t h = fnv1a64(j.dump());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pctof
