// Calibration pipeline: plateau and interval estimators on synthetic
// sweeps with known geometry (including pole injections), the full
// procedure on rendered frames with injected per-pixel phase offsets, and
// the binary container's integrity diagnostics.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <vector>

#include "pctof/calibration.hpp"

using Catch::Matchers::ContainsSubstring;
using pctof::AcquisitionConfig;
using pctof::CodingConfig;
using pctof::SweepRecord;

namespace {

constexpr double kNu = 1.0e7;
const double kRange = pctof::speed_of_light / (2.0 * kNu);

// Table-style pulsed coding with a 0.75 m sensitive width:
// 4 * sigma_eff * c / (2 omega) = 0.75  =>  sigma_eff = 0.0785988.
CodingConfig table_coding(double sigma_d = -1.0) {
  const double sigma_m = 0.013341;
  if (sigma_d < 0.0)
    sigma_d = std::sqrt(0.0785988 * 0.0785988 - sigma_m * sigma_m);
  return CodingConfig::pulsed(kNu, sigma_m, sigma_d);
}

AcquisitionConfig plain_acq(const CodingConfig& coding) {
  AcquisitionConfig acq;
  acq.coding = coding;
  acq.exposure_s = 1e-3;
  return acq;
}

// Single-pixel trapezoid sweep: lo plateau, linear rise, hi plateau,
// linear fall, all on a uniform 64-step axis.
SweepRecord trapezoid_sweep() {
  SweepRecord r;
  r.width = 1;
  r.height = 1;
  for (int j = 0; j < 64; ++j) {
    r.theta_g.push_back(pctof::two_pi * j / 64.0);
    double v;
    if (j < 24)
      v = -1.0;
    else if (j < 32)
      v = -1.0 + 2.0 * (j - 24) / 8.0;
    else if (j < 56)
      v = 1.0;
    else
      v = 1.0 - 2.0 * (j - 56) / 8.0;
    r.psi.push_back({v});
    r.valid.push_back({1});
  }
  return r;
}

}  // namespace

TEST_CASE("median conventions") {
  CHECK(pctof::median_of({3.0, 1.0, 2.0}) == 2.0);
  CHECK(pctof::median_of({1.0, 2.0, 3.0, 4.0}) == 2.5);
  CHECK(pctof::lower_median_of({1.0, 2.0, 3.0, 4.0}) == 2.0);
  CHECK(pctof::lower_median_of({5.0}) == 5.0);
  CHECK_THROWS_AS(pctof::median_of({}), pctof::EmptyMetricError);
  CHECK_THROWS_AS(pctof::lower_median_of({}), pctof::EmptyMetricError);
}

TEST_CASE("plateau estimation on a synthetic trapezoid") {
  const SweepRecord sweep = trapezoid_sweep();
  const auto p = pctof::estimate_plateaus(sweep, 0);
  CHECK(p.hi == 1.0);
  CHECK(p.lo == -1.0);

  SECTION("rotation of the pattern does not move the plateaus") {
    SweepRecord rot = sweep;
    for (int j = 0; j < 64; ++j) rot.psi[static_cast<std::size_t>(j)][0] =
        sweep.psi[static_cast<std::size_t>((j + 16) % 64)][0];
    const auto q = pctof::estimate_plateaus(rot, 0);
    CHECK(q.hi == 1.0);
    CHECK(q.lo == -1.0);
  }
  SECTION("a pole sample inside a plateau is ignored") {
    SweepRecord spiked = sweep;
    spiked.psi[40][0] = 250.0;  // denominator crossing, huge fraction
    const auto q = pctof::estimate_plateaus(spiked, 0);
    CHECK(q.hi == 1.0);
    CHECK(q.lo == -1.0);
  }
  SECTION("constant sweeps have no plateaus") {
    SweepRecord flat = sweep;
    for (auto& row : flat.psi) row[0] = 0.75;
    CHECK_THROWS_AS(pctof::estimate_plateaus(flat, 0),
                    pctof::DegenerateSweepError);
  }
  SECTION("mostly-invalid sweeps are degenerate") {
    SweepRecord sparse = sweep;
    for (int j = 0; j < 60; ++j) sparse.valid[static_cast<std::size_t>(j)][0] = 0;
    CHECK_THROWS_AS(pctof::estimate_plateaus(sparse, 0),
                    pctof::DegenerateSweepError);
  }
}

TEST_CASE("zero equivalent is the plateau midpoint") {
  CHECK(pctof::zero_equivalent(1.0, -1.0) == 0.0);
  CHECK(pctof::zero_equivalent(0.8, -0.6) == Catch::Approx(0.1).margin(1e-15));
  CHECK_THROWS_AS(pctof::zero_equivalent(-1.0, 1.0), pctof::DomainError);
  CHECK_THROWS_AS(pctof::zero_equivalent(1.0, 1.0), pctof::DomainError);
}

TEST_CASE("sensitive interval brackets the rising edge") {
  const SweepRecord sweep = trapezoid_sweep();
  const auto plateaus = pctof::estimate_plateaus(sweep, 0);
  const auto iv = pctof::estimate_sensitive_interval(sweep, 0, plateaus);
  // Departure points at 2% of span: the last lo-plateau sample and the
  // first hi-plateau sample.
  CHECK(iv.lo == Catch::Approx(pctof::two_pi * 24 / 64.0).margin(1e-12));
  CHECK(iv.hi == Catch::Approx(pctof::two_pi * 32 / 64.0).margin(1e-12));

  SECTION("pole jumps are not mistaken for the edge") {
    // Replace the smooth rise with a pole excursion: the only sign change
    // left goes through a sample far outside the plateau band, which the
    // crossing guard must reject.
    SweepRecord jump = trapezoid_sweep();
    for (int j = 24; j < 32; ++j)
      jump.psi[static_cast<std::size_t>(j)][0] = j < 28 ? -1.0 : 1.0;
    jump.psi[28][0] = -40.0;
    CHECK_THROWS_AS(
        pctof::estimate_sensitive_interval(jump, 0, {1.0, -1.0}),
        pctof::DegenerateSweepError);
  }
  SECTION("the hint selects among multiple rising crossings") {
    // Two rises per period: a double-frequency trapezoid.
    SweepRecord twin;
    twin.width = twin.height = 1;
    for (int j = 0; j < 64; ++j) {
      twin.theta_g.push_back(pctof::two_pi * j / 64.0);
      const int half = j % 32;
      double v;
      if (half < 12)
        v = -1.0;
      else if (half < 16)
        v = -1.0 + 2.0 * (half - 12) / 4.0;
      else if (half < 28)
        v = 1.0;
      else
        v = 1.0 - 2.0 * (half - 28) / 4.0;
      twin.psi.push_back({v});
      twin.valid.push_back({1});
    }
    const auto tp = pctof::estimate_plateaus(twin, 0);
    const auto near_first =
        pctof::estimate_sensitive_interval(twin, 0, tp, pctof::two_pi * 14 / 64.0);
    const auto near_second =
        pctof::estimate_sensitive_interval(twin, 0, tp, pctof::two_pi * 46 / 64.0);
    CHECK(pctof::wrap_two_pi(0.5 * (near_first.lo + near_first.hi)) ==
          Catch::Approx(pctof::two_pi * 14 / 64.0).margin(0.2));
    CHECK(pctof::wrap_two_pi(0.5 * (near_second.lo + near_second.hi)) ==
          Catch::Approx(pctof::two_pi * 46 / 64.0).margin(0.2));
  }
}

TEST_CASE("coarse and fine sweep mechanics") {
  const CodingConfig coding = table_coding();
  AcquisitionConfig acq = plain_acq(coding);
  const pctof::SceneFrame px = pctof::make_plane(5.0, 1.0, 0.0, 1, 1, kRange);

  CHECK_THROWS_AS(pctof::coarse_sweep(px, acq, 4), pctof::DomainError);

  SECTION("fine sweep sample count floors onto the step grid") {
    const double step = pctof::two_pi / 16384.0;
    const auto rec = pctof::fine_sweep(px, acq, {0.0, 0.314}, step);
    CHECK(rec.sample_count() == 819);
    CHECK(rec.theta_g.front() == 0.0);
    CHECK(rec.theta_g.back() <= 0.314 + 1e-12);

    const auto two = pctof::fine_sweep(px, acq, {0.5, 0.9}, 0.4);
    CHECK(two.sample_count() == 2);
    CHECK(two.theta_g[1] == Catch::Approx(0.9).margin(1e-15));
  }
  SECTION("fine sweep rejects bad steps and windows") {
    CHECK_THROWS_AS(pctof::fine_sweep(px, acq, {0.0, 0.3}, 0.0), pctof::DomainError);
    CHECK_THROWS_AS(pctof::fine_sweep(px, acq, {0.3, 0.3}, 0.01), pctof::DomainError);
    CHECK_THROWS_AS(pctof::fine_sweep(px, acq, {0.0, 7.0}, 0.01), pctof::DomainError);
  }
  SECTION("sweeps rerun bit-identically under noise") {
    acq.noise.sigma_read = 1e-7;
    acq.seed = 3;
    const auto a = pctof::fine_sweep(px, acq, {1.0, 1.1}, 0.01);
    const auto b = pctof::fine_sweep(px, acq, {1.0, 1.1}, 0.01);
    REQUIRE(a.sample_count() == b.sample_count());
    for (std::size_t j = 0; j < a.sample_count(); ++j)
      CHECK(a.psi[j][0] == b.psi[j][0]);
  }
  SECTION("a sweep axis crossing the period stays strictly increasing") {
    const auto rec = pctof::fine_sweep(px, acq, {6.0, 6.6}, 0.05);
    REQUIRE_NOTHROW(rec.validate());
    CHECK(rec.theta_g.back() > pctof::two_pi);
  }
}

TEST_CASE("ideal calibration: uniform zero phases and an all-zero mask") {
  const CodingConfig coding = table_coding();
  AcquisitionConfig acq = plain_acq(coding);
  const pctof::CalibrationTable table = pctof::build_calibration(5.0, acq, 8, 6);

  REQUIRE(table.valid_count() == table.pixel_count());
  for (double m : table.mask) CHECK(m == 0.0);

  const double hint = pctof::doi_to_global_shift(5.0, coding);
  const double sigma = coding.sigma_eff();
  for (std::size_t p = 0; p < table.pixel_count(); ++p) {
    const auto& pc = table.pixels[p];
    // The zero crossing sits at the tap-0 edge aligned with the target.
    CHECK(std::fabs(pctof::circular_delta(pctof::wrap_two_pi(pc.zero_phase), hint)) <
          1e-6);
    CHECK(pc.zero_phase == table.pixels[0].zero_phase);  // identical pixels
    // Interval width tracks the 1/e^2 edge width within 15%.
    CHECK(pc.interval.width() == Catch::Approx(4.0 * sigma).epsilon(0.15));
    CHECK(pc.plateau_hi > pc.zero_equiv);
    CHECK(pc.plateau_lo < pc.zero_equiv);
  }

  SECTION("measure_offset at the zero equivalent is exactly zero") {
    for (std::size_t p = 0; p < table.pixel_count(); ++p)
      CHECK(pctof::measure_offset(table.pixels[p].zero_equiv, p, table) == 0.0);
  }
  SECTION("measure_offset maps a 1 cm retreat to its phase equivalent") {
    AcquisitionConfig probe = acq;
    probe.coding.theta_g = hint;
    const pctof::SceneFrame far_plane =
        pctof::make_plane(5.01, 1.0, 0.0, 8, 6, kRange);
    const auto rf = pctof::raw_fraction(pctof::render_taps(far_plane, probe));
    const double expected =
        2.0 * coding.omega() * 0.01 / pctof::speed_of_light;
    for (std::size_t p = 0; p < table.pixel_count(); ++p) {
      REQUIRE(rf.valid[p] == 1);
      CHECK(pctof::measure_offset(rf.psi[p], p, table) ==
            Catch::Approx(expected).margin(1e-6));
    }
  }
  SECTION("raw fractions outside the response range are rejected") {
    CHECK_THROWS_AS(
        pctof::measure_offset(table.pixels[0].plateau_hi + 10.0, 0, table),
        pctof::OutOfSensitiveRangeError);
  }
  SECTION("wider edges calibrate wider intervals") {
    const pctof::CalibrationTable narrow =
        pctof::build_calibration(5.0, plain_acq(table_coding(0.05)), 6, 4);
    CHECK(narrow.pixels[0].interval.width() < table.pixels[0].interval.width());
    const double narrow_sigma = table_coding(0.05).sigma_eff();
    CHECK(narrow.pixels[0].interval.width() ==
          Catch::Approx(4.0 * narrow_sigma).epsilon(0.15));
  }
}

TEST_CASE("calibration recovers injected per-pixel phase offsets") {
  const CodingConfig coding = table_coding();
  AcquisitionConfig acq = plain_acq(coding);
  const int w = 15, h = 9;  // odd pixel count, exact median
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> beta(n);
  for (std::size_t p = 0; p < n; ++p)
    beta[p] = (static_cast<int>(p % 3) - 1) * 0.01;
  acq.pixel_phase_offset = beta;

  const pctof::CalibrationTable table = pctof::build_calibration(5.0, acq, w, h);
  REQUIRE(table.valid_count() == n);

  double sq = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const double err = table.mask[p] - beta[p];
    sq += err * err;
  }
  CHECK(std::sqrt(sq / static_cast<double>(n)) < 1e-3);
  CHECK(pctof::median_of(table.mask) == 0.0);  // odd count, lower-median ref

  SECTION("a common phase shift leaves the mask unchanged") {
    AcquisitionConfig shifted = acq;
    for (auto& b : shifted.pixel_phase_offset) b += 0.23;
    const pctof::CalibrationTable t2 = pctof::build_calibration(5.0, shifted, w, h);
    REQUIRE(t2.valid_count() == n);
    for (std::size_t p = 0; p < n; ++p)
      CHECK(t2.mask[p] == Catch::Approx(table.mask[p]).margin(1e-6));
  }
}

TEST_CASE("calibration failure accounting") {
  const CodingConfig coding = table_coding();

  SECTION("more than 20% dead pixels abort the calibration") {
    AcquisitionConfig acq = plain_acq(coding);
    acq.pixel_gain.assign(12, 1.0);
    for (int p = 0; p < 3; ++p) acq.pixel_gain[static_cast<std::size_t>(p)] = 1e-300;
    CHECK_THROWS_AS(pctof::build_calibration(5.0, acq, 4, 3),
                    pctof::CalibrationError);
  }
  SECTION("isolated dead pixels are carried as invalid") {
    AcquisitionConfig acq = plain_acq(coding);
    acq.pixel_gain.assign(12, 1.0);
    acq.pixel_gain[5] = 1e-300;
    const pctof::CalibrationTable t = pctof::build_calibration(5.0, acq, 4, 3);
    CHECK(t.valid_count() == 11);
    CHECK_FALSE(t.pixels[5].valid);
    CHECK(t.mask[5] == 0.0);
    CHECK_THROWS_AS(pctof::measure_offset(0.0, 5, t), pctof::DomainError);
  }
  SECTION("reference depth must be inside the unambiguous range") {
    AcquisitionConfig acq = plain_acq(coding);
    CHECK_THROWS_AS(pctof::build_calibration(0.0, acq, 4, 3), pctof::DomainError);
    CHECK_THROWS_AS(pctof::build_calibration(kRange, acq, 4, 3), pctof::DomainError);
  }
  SECTION("sinusoid coding cannot be edge-calibrated") {
    AcquisitionConfig acq = plain_acq(CodingConfig::sinusoid(kNu));
    CHECK_THROWS_AS(pctof::build_calibration(5.0, acq, 4, 3),
                    pctof::UnsupportedCodingError);
  }
}

TEST_CASE("calibration survives read noise at 5% of the edge height") {
  const CodingConfig coding = table_coding();
  AcquisitionConfig acq = plain_acq(coding);
  const double periods = acq.exposure_s * kNu;
  const double plateau =
      coding.sigma_eff() * std::sqrt(pctof::two_pi) / coding.omega();
  acq.noise.sigma_read = 0.05 * periods * plateau;
  acq.seed = 77;

  const pctof::CalibrationTable table = pctof::build_calibration(5.0, acq, 16, 12);
  const double valid_fraction = static_cast<double>(table.valid_count()) /
                                static_cast<double>(table.pixel_count());
  CHECK(valid_fraction >= 0.95);

  // The mask should still be unbiased at the millimeter-equivalent level.
  std::vector<double> masks;
  for (std::size_t p = 0; p < table.pixel_count(); ++p)
    if (table.pixels[p].valid) masks.push_back(table.mask[p]);
  double sq = 0.0;
  for (double m : masks) sq += m * m;
  const double rms_phase = std::sqrt(sq / static_cast<double>(masks.size()));
  const double rms_depth = rms_phase * pctof::speed_of_light / (2.0 * coding.omega());
  CHECK(rms_depth < 0.005);
}

TEST_CASE("calibration container integrity") {
  const CodingConfig coding = table_coding();
  AcquisitionConfig acq = plain_acq(coding);
  acq.seed = 11;
  const pctof::CalibrationTable table = pctof::build_calibration(5.0, acq, 5, 4);
  const std::string path = "cal_rt.pctofcal";
  pctof::save_calibration(path, table);

  SECTION("round trip is bit exact") {
    const pctof::CalibrationTable r = pctof::load_calibration(path);
    REQUIRE(r.width == table.width);
    REQUIRE(r.height == table.height);
    CHECK(r.reference_depth == table.reference_depth);
    CHECK(r.seed == table.seed);
    CHECK(r.config_fingerprint == table.config_fingerprint);
    CHECK(r.coding.same_signal_family(table.coding));
    for (std::size_t p = 0; p < table.pixel_count(); ++p) {
      REQUIRE(r.pixels[p].valid == table.pixels[p].valid);
      CHECK(r.mask[p] == table.mask[p]);
      if (!table.pixels[p].valid) continue;
      CHECK(r.pixels[p].plateau_hi == table.pixels[p].plateau_hi);
      CHECK(r.pixels[p].plateau_lo == table.pixels[p].plateau_lo);
      CHECK(r.pixels[p].zero_equiv == table.pixels[p].zero_equiv);
      CHECK(r.pixels[p].zero_phase == table.pixels[p].zero_phase);
      CHECK(r.pixels[p].interval.lo == table.pixels[p].interval.lo);
      CHECK(r.pixels[p].interval.hi == table.pixels[p].interval.hi);
      CHECK(r.pixels[p].response.smoothing == table.pixels[p].response.smoothing);
      REQUIRE(r.pixels[p].response.xs.size() == table.pixels[p].response.xs.size());
      for (std::size_t k = 0; k < table.pixels[p].response.xs.size(); ++k) {
        CHECK(r.pixels[p].response.xs[k] == table.pixels[p].response.xs[k]);
        CHECK(r.pixels[p].response.ys[k] == table.pixels[p].response.ys[k]);
        CHECK(r.pixels[p].response.m2[k] == table.pixels[p].response.m2[k]);
      }
    }
  }
  SECTION("bad magic") {
    std::string bytes = pctof::detail::read_file_bytes(path);
    bytes[0] = 'X';
    pctof::detail::write_file_bytes(path, bytes);
    CHECK_THROWS_WITH(pctof::load_calibration(path), ContainsSubstring("magic"));
  }
  SECTION("unsupported version") {
    std::string bytes = pctof::detail::read_file_bytes(path);
    bytes[8] = 2;
    pctof::detail::write_file_bytes(path, bytes);
    CHECK_THROWS_WITH(pctof::load_calibration(path),
                      ContainsSubstring("version"));
  }
  SECTION("flipped payload byte fails the checksum") {
    std::string bytes = pctof::detail::read_file_bytes(path);
    bytes[bytes.size() - 12] = static_cast<char>(bytes[bytes.size() - 12] ^ 0xff);
    pctof::detail::write_file_bytes(path, bytes);
    CHECK_THROWS_WITH(pctof::load_calibration(path),
                      ContainsSubstring("checksum"));
  }
  SECTION("truncation names the missing byte count") {
    std::string bytes = pctof::detail::read_file_bytes(path);
    bytes.resize(bytes.size() - 21);
    pctof::detail::write_file_bytes(path, bytes);
    CHECK_THROWS_WITH(pctof::load_calibration(path),
                      ContainsSubstring("truncated"));
  }
  SECTION("trailing bytes are rejected") {
    std::string bytes = pctof::detail::read_file_bytes(path);
    bytes += "junk";
    pctof::detail::write_file_bytes(path, bytes);
    CHECK_THROWS_AS(pctof::load_calibration(path), pctof::FormatError);
  }
  std::remove(path.c_str());
}
