// Depth decoding: the global arctangent decoder against ground truth over
// the full range, the calibrated decoder around its depth of interest
// (bias, locality, invariances and the systematic error of the wrong
// model), and the error metrics and slicing utilities.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <vector>

#include "pctof/reconstruction.hpp"

using pctof::AcquisitionConfig;
using pctof::CalibrationTable;
using pctof::CodingConfig;
using pctof::DepthMap;
using pctof::SceneFrame;
using pctof::TapFrame;

namespace {

constexpr double kNu = 1.0e7;
constexpr double kDoi = 5.0;
const double kRange = pctof::speed_of_light / (2.0 * kNu);

CodingConfig pulsed_coding(double theta_g = 0.0) {
  const double sigma_m = 0.013341;
  const double sigma_d = std::sqrt(0.0785988 * 0.0785988 - sigma_m * sigma_m);
  return CodingConfig::pulsed(kNu, sigma_m, sigma_d, theta_g);
}

AcquisitionConfig noise_free(const CodingConfig& coding) {
  AcquisitionConfig acq;
  acq.coding = coding;
  acq.exposure_s = 1e-3;
  return acq;
}

// One shared calibration at the depth of interest; built once.
const CalibrationTable& doi_table() {
  static const CalibrationTable table =
      pctof::build_calibration(kDoi, noise_free(pulsed_coding()), 8, 6);
  return table;
}

TapFrame render_at(const SceneFrame& scene, double theta_g) {
  return pctof::render_taps(scene, noise_free(pulsed_coding(theta_g)));
}

}  // namespace

TEST_CASE("arctangent decoder is exact and monotone over the range") {
  const CodingConfig sin = CodingConfig::sinusoid(kNu);
  const AcquisitionConfig acq = noise_free(sin);
  double previous = -1.0;
  for (int k = 0; k < 360; ++k) {
    const double truth = (k + 0.5) * kRange / 361.0;
    const SceneFrame px = pctof::make_plane(truth, 1.0, 0.3, 1, 1, kRange);
    const DepthMap map = pctof::sinusoid_depth(pctof::render_taps(px, acq));
    REQUIRE(map.valid[0] == 1);
    CAPTURE(k, truth);
    CHECK(std::fabs(map.depth[0] - truth) <= 1e-9);
    CHECK(map.depth[0] > previous);
    previous = map.depth[0];
  }

  SECTION("zero depth decodes to zero, quarter range to c/(8 nu)") {
    const SceneFrame zero = pctof::make_plane(0.0, 1.0, 0.0, 1, 1, kRange);
    const DepthMap m0 = pctof::sinusoid_depth(pctof::render_taps(zero, acq));
    REQUIRE(m0.valid[0] == 1);
    CHECK(std::fabs(m0.depth[0]) <= 1e-9);

    const double quarter = pctof::speed_of_light / (8.0 * kNu);
    const SceneFrame q = pctof::make_plane(quarter, 1.0, 0.0, 1, 1, kRange);
    const DepthMap mq = pctof::sinusoid_depth(pctof::render_taps(q, acq));
    CHECK(std::fabs(mq.depth[0] - quarter) <= 1e-9);
  }
  SECTION("a global demodulation shift does not move the decoded depth") {
    const CodingConfig turned = CodingConfig::sinusoid(kNu, 1.3);
    const SceneFrame s = pctof::make_plane(7.1, 1.0, 0.1, 2, 2, kRange);
    const DepthMap m = pctof::sinusoid_depth(pctof::render_taps(s, noise_free(turned)));
    for (std::size_t p = 0; p < m.pixel_count(); ++p) {
      REQUIRE(m.valid[p] == 1);
      CHECK(std::fabs(m.depth[p] - 7.1) <= 1e-9);
    }
  }
  SECTION("pulsed frames are rejected unless explicitly allowed") {
    const SceneFrame s = pctof::make_plane(kDoi, 1.0, 0.0, 2, 2, kRange);
    const TapFrame pf = render_at(s, pctof::doi_to_global_shift(kDoi, pulsed_coding()));
    CHECK_THROWS_AS(pctof::sinusoid_depth(pf), pctof::UnsupportedCodingError);
    CHECK_NOTHROW(pctof::sinusoid_depth(pf, true));
  }
}

TEST_CASE("calibrated decoder around the depth of interest") {
  const CalibrationTable& table = doi_table();
  const double shift = pctof::doi_to_global_shift(kDoi, pulsed_coding());

  SECTION("plane at the depth of interest is recovered to sub-0.05 mm") {
    const SceneFrame s = pctof::make_plane(kDoi, 1.0, 0.0, 8, 6, kRange);
    const DepthMap map = pctof::pctof_depth(render_at(s, shift), table, kDoi);
    REQUIRE(map.valid_count() == map.pixel_count());
    const auto r = pctof::rms_error(map, s);
    CHECK(r.rms <= 5e-5);
    CHECK(r.valid_fraction == 1.0);
  }
  SECTION("millimeter stairs resolve into distinct plateaus") {
    const SceneFrame stairs =
        pctof::make_stairs(kDoi - 0.0075, 0.005, 3, 2, 8, 6, kRange);
    const DepthMap map = pctof::pctof_depth(render_at(stairs, shift), table, kDoi);
    REQUIRE(map.valid_count() == map.pixel_count());
    double band_mean[4] = {};
    for (int x = 0; x < 8; ++x) {
      double sum = 0.0;
      for (int y = 0; y < 6; ++y) sum += map.depth[static_cast<std::size_t>(y) * 8 + x];
      band_mean[std::min(x / 2, 3)] += sum / 6.0 / 2.0;
    }
    for (int b = 0; b < 4; ++b) {
      const double truth = kDoi - 0.0075 + 0.005 * b;
      CHECK(band_mean[b] == Catch::Approx(truth).margin(1e-4));
      if (b > 0)
        CHECK(band_mean[b] - band_mean[b - 1] == Catch::Approx(0.005).margin(2e-4));
    }
  }
  SECTION("rail translations move the decoded plane one to one") {
    const SceneFrame base = pctof::make_plane(kDoi, 1.0, 0.0, 8, 6, kRange);
    for (const double d : {-0.15, -0.05, 0.07, 0.15}) {
      const SceneFrame moved = pctof::translate_depth(base, d);
      const DepthMap map = pctof::pctof_depth(render_at(moved, shift), table, kDoi);
      REQUIRE(map.valid_count() == map.pixel_count());
      for (std::size_t p = 0; p < map.pixel_count(); ++p)
        CHECK(map.depth[p] == Catch::Approx(kDoi + d).margin(5e-5));
    }
  }
  SECTION("a plane one sensitive width away is entirely invalid") {
    const double width = pctof::sensitive_range(pulsed_coding()).depth_width;
    const SceneFrame far_plane =
        pctof::make_plane(kDoi + width, 1.0, 0.0, 8, 6, kRange);
    const DepthMap map = pctof::pctof_depth(render_at(far_plane, shift), table, kDoi);
    CHECK(map.valid_count() == 0);
    CHECK_THROWS_AS(pctof::rms_error(map, far_plane), pctof::EmptyMetricError);
  }
  SECTION("reflectance and ambient changes do not move the depth") {
    const SceneFrame a = pctof::make_plane(kDoi + 0.05, 1.0, 0.0, 8, 6, kRange);
    SceneFrame b = a;
    for (std::size_t p = 0; p < b.pixel_count(); ++p) {
      b.albedo[p] = (p % 2) ? 2.0 : 0.5;
      b.ambient[p] = 0.2;
    }
    const DepthMap ma = pctof::pctof_depth(render_at(a, shift), table, kDoi);
    const DepthMap mb = pctof::pctof_depth(render_at(b, shift), table, kDoi);
    REQUIRE(ma.valid_count() == ma.pixel_count());
    REQUIRE(mb.valid_count() == mb.pixel_count());
    for (std::size_t p = 0; p < ma.pixel_count(); ++p)
      CHECK(std::fabs(ma.depth[p] - mb.depth[p]) <= 1e-9);
  }
  SECTION("the sinusoid model applied to pulsed taps is badly biased") {
    const SceneFrame s = pctof::make_plane(kDoi + 0.1, 1.0, 0.0, 8, 6, kRange);
    const TapFrame frame = render_at(s, shift);
    const DepthMap wrong = pctof::sinusoid_depth(frame, true);
    const DepthMap right = pctof::pctof_depth(frame, table, kDoi);
    CHECK(pctof::rms_error(wrong, s).rms > 0.1);
    CHECK(pctof::rms_error(right, s).rms < 1e-4);
  }
}

TEST_CASE("calibrated decoder compatibility guards") {
  const CalibrationTable& table = doi_table();
  const double shift = pctof::doi_to_global_shift(kDoi, pulsed_coding());
  const SceneFrame good = pctof::make_plane(kDoi, 1.0, 0.0, 8, 6, kRange);

  SECTION("resolution mismatch") {
    const SceneFrame small = pctof::make_plane(kDoi, 1.0, 0.0, 4, 3, kRange);
    CHECK_THROWS_AS(pctof::pctof_depth(render_at(small, shift), table, kDoi),
                    pctof::CompatibilityError);
  }
  SECTION("different signal family") {
    const CodingConfig other =
        CodingConfig::pulsed(kNu, 0.013341, 0.05, shift);
    const TapFrame f = pctof::render_taps(good, noise_free(other));
    CHECK_THROWS_AS(pctof::pctof_depth(f, table, kDoi), pctof::CompatibilityError);
  }
  SECTION("sinusoid-coded frame") {
    const TapFrame f =
        pctof::render_taps(good, noise_free(CodingConfig::sinusoid(kNu)));
    CHECK_THROWS_AS(pctof::pctof_depth(f, table, kDoi), pctof::CompatibilityError);
  }
  SECTION("global shift not aimed at the depth of interest") {
    const TapFrame f = render_at(good, shift + 0.001);
    CHECK_THROWS_AS(pctof::pctof_depth(f, table, kDoi), pctof::CompatibilityError);
  }
  SECTION("depth of interest outside the range") {
    const TapFrame f = render_at(good, shift);
    CHECK_THROWS_AS(pctof::pctof_depth(f, table, 0.0), pctof::DomainError);
    CHECK_THROWS_AS(pctof::pctof_depth(f, table, kRange), pctof::DomainError);
  }
}

TEST_CASE("rms error metric") {
  const SceneFrame truth = pctof::make_plane(1.0, 1.0, 0.0, 5, 4, kRange);
  DepthMap map;
  map.width = 5;
  map.height = 4;
  map.depth.assign(20, 1.0);
  map.valid.assign(20, 1);

  CHECK(pctof::rms_error(map, truth).rms == 0.0);

  SECTION("a uniform 1 mm bias reads back as 1 mm") {
    for (auto& d : map.depth) d = 1.0 + 0.001;
    const auto r = pctof::rms_error(map, truth);
    CHECK(std::fabs(r.rms - 0.001) <= 1e-15);
    CHECK(r.valid_fraction == 1.0);
  }
  SECTION("invalid pixels are excluded from both rms and fraction") {
    for (std::size_t p = 0; p < 10; ++p) {
      map.valid[p] = 0;
      map.depth[p] = 1e6;  // must not leak into the metric
    }
    const auto r = pctof::rms_error(map, truth);
    CHECK(r.rms == 0.0);
    CHECK(r.valid_fraction == 0.5);
  }
  SECTION("no valid pixels is an error, not a zero") {
    map.valid.assign(20, 0);
    CHECK_THROWS_AS(pctof::rms_error(map, truth), pctof::EmptyMetricError);
  }
  SECTION("resolution mismatch is an error") {
    const SceneFrame other = pctof::make_plane(1.0, 1.0, 0.0, 4, 5, kRange);
    CHECK_THROWS_AS(pctof::rms_error(map, other), pctof::DomainError);
  }
}

TEST_CASE("depth slices") {
  DepthMap map;
  map.width = 6;
  map.height = 5;
  map.depth.assign(30, 0.0);
  map.valid.assign(30, 1);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 6; ++x)
      map.depth[static_cast<std::size_t>(y) * 6 + x] = 2.0 + 0.01 * (x / 2);

  const auto s = pctof::depth_slice(map, 2, 2);
  REQUIRE(s.value.size() == 6);
  for (int x = 0; x < 6; ++x) {
    CHECK(s.present[static_cast<std::size_t>(x)] == 1);
    CHECK(s.value[static_cast<std::size_t>(x)] ==
          Catch::Approx(2.0 + 0.01 * (x / 2)).margin(1e-12));
  }

  SECTION("zero half width reads a single row") {
    map.depth[static_cast<std::size_t>(0) * 6 + 0] = 9.0;  // other rows untouched
    const auto one = pctof::depth_slice(map, 2, 0);
    CHECK(one.value[0] == Catch::Approx(2.0).margin(1e-12));
  }
  SECTION("columns with no valid band pixel are marked absent") {
    for (int y = 0; y < 5; ++y) map.valid[static_cast<std::size_t>(y) * 6 + 3] = 0;
    const auto gap = pctof::depth_slice(map, 2, 1);
    CHECK(gap.present[3] == 0);
    CHECK(gap.value[3] == 0.0);
    CHECK(gap.present[2] == 1);
  }
  SECTION("the band must fit inside the frame") {
    CHECK_THROWS_AS(pctof::depth_slice(map, 0, 2), pctof::DomainError);
    CHECK_THROWS_AS(pctof::depth_slice(map, 4, 1), pctof::DomainError);
    CHECK_THROWS_AS(pctof::depth_slice(map, 2, -1), pctof::DomainError);
  }
}

TEST_CASE("depth export carries invalid pixels as NaN") {
  DepthMap map;
  map.width = 3;
  map.height = 2;
  map.depth = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  map.valid = {1, 0, 1, 1, 1, 0};

  const pctof::Plane plane = pctof::depth_plane(map);
  CHECK(plane.data[0] == 1.0);
  CHECK(std::isnan(plane.data[1]));
  CHECK(std::isnan(plane.data[5]));

  pctof::save_depth_csv("depth_rt.csv", map);
  const pctof::Plane r = pctof::read_plane_csv("depth_rt.csv");
  CHECK(r.data[0] == 1.0);
  CHECK(std::isnan(r.data[1]));
  CHECK(r.data[4] == 5.0);
  std::remove("depth_rt.csv");

  pctof::save_depth_pgm16("depth_rt.pgm", map);
  const std::string bytes = pctof::detail::read_file_bytes("depth_rt.pgm");
  const std::string header = "P5\n3 2\n65535\n";
  // Invalid pixel 1 quantizes to 0; valid minimum (pixel 0) also lands at 0.
  CHECK(bytes[header.size() + 2] == 0);
  CHECK(bytes[header.size() + 3] == 0);
  std::remove("depth_rt.pgm");
  std::remove("depth_rt.pgm.json");
}
