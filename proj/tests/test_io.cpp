// Image container behavior: exact CSV round trips with positional error
// diagnostics, PFM byte layout (bottom-to-top, little-endian floats) and
// PGM16 quantization with its JSON sidecar.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

#include "json.hpp"
#include "pctof/image_io.hpp"

using Catch::Matchers::ContainsSubstring;
using pctof::Plane;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

Plane sample_plane() {
  Plane p = Plane::constant(3, 2, 0.0);
  p.at(0, 0) = 1.0;
  p.at(1, 0) = -2.5;
  p.at(2, 0) = 0.1 + 0.2;  // not exactly 0.3; the trip must keep the bits
  p.at(0, 1) = 1e-300;
  p.at(1, 1) = 1.7976931348623157e308;
  p.at(2, 1) = 299792458.0;
  return p;
}

}  // namespace

TEST_CASE("CSV round trip is bit exact") {
  const TempFile f("io_rt.csv");
  const Plane p = sample_plane();
  pctof::write_plane_csv(f.path, p);
  const Plane r = pctof::read_plane_csv(f.path);
  REQUIRE(r.width == 3);
  REQUIRE(r.height == 2);
  for (std::size_t i = 0; i < p.size(); ++i) {
    CAPTURE(i);
    CHECK(std::memcmp(&r.data[i], &p.data[i], sizeof(double)) == 0);
  }
}

TEST_CASE("CSV reader reports the offending line and field") {
  const TempFile f("io_bad.csv");
  SECTION("non-numeric token") {
    pctof::detail::write_file_bytes(f.path, "1,2,3\n4,oops,6\n");
    CHECK_THROWS_WITH(pctof::read_plane_csv(f.path),
                      ContainsSubstring("line 2, field 2") &&
                          ContainsSubstring("oops"));
  }
  SECTION("trailing junk after a number") {
    pctof::detail::write_file_bytes(f.path, "1,2\n3,4x\n");
    CHECK_THROWS_AS(pctof::read_plane_csv(f.path), pctof::FormatError);
  }
  SECTION("ragged row") {
    pctof::detail::write_file_bytes(f.path, "1,2,3\n4,5\n");
    CHECK_THROWS_WITH(pctof::read_plane_csv(f.path),
                      ContainsSubstring("expected 3 fields, got 2"));
  }
  SECTION("empty file") {
    pctof::detail::write_file_bytes(f.path, "");
    CHECK_THROWS_AS(pctof::read_plane_csv(f.path), pctof::FormatError);
  }
  SECTION("missing file") {
    CHECK_THROWS_AS(pctof::read_plane_csv("does_not_exist_anywhere.csv"),
                    pctof::IoError);
  }
}

TEST_CASE("CSV reader tolerates CRLF and a missing final newline") {
  const TempFile f("io_crlf.csv");
  pctof::detail::write_file_bytes(f.path, "1,2\r\n3,4\r\n");
  const Plane a = pctof::read_plane_csv(f.path);
  REQUIRE(a.width == 2);
  REQUIRE(a.height == 2);
  CHECK(a.at(1, 1) == 4.0);

  pctof::detail::write_file_bytes(f.path, "1,2\n3,4");
  const Plane b = pctof::read_plane_csv(f.path);
  REQUIRE(b.height == 2);
  CHECK(b.at(0, 1) == 3.0);
}

TEST_CASE("PFM layout: header, little-endian floats, bottom row first") {
  const TempFile f("io_layout.pfm");
  Plane p = Plane::constant(2, 2, 0.0);
  p.at(0, 0) = 1.0;
  p.at(1, 0) = 2.0;
  p.at(0, 1) = 3.0;
  p.at(1, 1) = 4.0;
  pctof::write_plane_pfm(f.path, p);

  const std::string bytes = pctof::detail::read_file_bytes(f.path);
  const std::string header = "Pf\n2 2\n-1\n";
  REQUIRE(bytes.size() == header.size() + 16);
  CHECK(bytes.compare(0, header.size(), header) == 0);
  float first;
  std::memcpy(&first, bytes.data() + header.size(), 4);
  CHECK(first == 3.0f);  // bottom-left pixel leads the raster

  const Plane r = pctof::read_plane_pfm(f.path);
  for (std::size_t i = 0; i < p.size(); ++i) CHECK(r.data[i] == p.data[i]);
}

TEST_CASE("PFM round trip holds float precision across magnitudes") {
  const TempFile f("io_rt.pfm");
  Plane p = Plane::constant(16, 4, 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    p.data[i] = std::ldexp(1.0 + 1.0 / 3.0, static_cast<int>(i) % 20 - 10);
  pctof::write_plane_pfm(f.path, p);
  const Plane r = pctof::read_plane_pfm(f.path);
  for (std::size_t i = 0; i < p.size(); ++i)
    CHECK(r.data[i] == static_cast<double>(static_cast<float>(p.data[i])));
}

TEST_CASE("PFM reader rejects what it cannot represent") {
  const TempFile f("io_bad.pfm");
  SECTION("color PFM") {
    pctof::detail::write_file_bytes(f.path, "PF\n2 2\n-1\n");
    CHECK_THROWS_WITH(pctof::read_plane_pfm(f.path), ContainsSubstring("color"));
  }
  SECTION("foreign magic") {
    pctof::detail::write_file_bytes(f.path, "P5\n2 2\n255\n");
    CHECK_THROWS_AS(pctof::read_plane_pfm(f.path), pctof::FormatError);
  }
  SECTION("truncated raster names the byte position") {
    Plane p = Plane::constant(4, 4, 1.5);
    pctof::write_plane_pfm(f.path, p);
    const std::string whole = pctof::detail::read_file_bytes(f.path);
    pctof::detail::write_file_bytes(f.path, whole.substr(0, whole.size() - 5));
    CHECK_THROWS_WITH(pctof::read_plane_pfm(f.path),
                      ContainsSubstring("truncated"));
  }
  SECTION("zero scale") {
    pctof::detail::write_file_bytes(f.path, "Pf\n1 1\n0\nXXXX");
    CHECK_THROWS_AS(pctof::read_plane_pfm(f.path), pctof::FormatError);
  }
  SECTION("truncated header") {
    pctof::detail::write_file_bytes(f.path, "Pf\n2");
    CHECK_THROWS_AS(pctof::read_plane_pfm(f.path), pctof::FormatError);
  }
}

TEST_CASE("PGM16 quantizes linearly and records the mapping") {
  const TempFile f("io_q.pgm");
  const TempFile side("io_q.pgm.json");
  Plane p = Plane::constant(4, 1, 0.0);
  p.at(0, 0) = 2.0;                                     // lo -> 0
  p.at(1, 0) = 6.0;                                     // hi -> 65535
  p.at(2, 0) = 4.0;                                     // midpoint
  p.at(3, 0) = std::numeric_limits<double>::quiet_NaN();  // -> 0
  pctof::write_plane_pgm16(f.path, p, 2.0, 6.0);

  const std::string bytes = pctof::detail::read_file_bytes(f.path);
  const std::string header = "P5\n4 1\n65535\n";
  REQUIRE(bytes.size() == header.size() + 8);
  auto sample = [&](int i) {
    const auto hi = static_cast<unsigned char>(bytes[header.size() + 2 * i]);
    const auto lo = static_cast<unsigned char>(bytes[header.size() + 2 * i + 1]);
    return (static_cast<unsigned>(hi) << 8) | lo;  // big-endian per netpbm
  };
  CHECK(sample(0) == 0u);
  CHECK(sample(1) == 65535u);
  CHECK(sample(2) == 32768u);  // round(0.5 * 65535) rounds half up
  CHECK(sample(3) == 0u);

  const auto meta = nlohmann::json::parse(pctof::detail::read_file_bytes(side.path));
  CHECK(meta.at("min").get<double>() == 2.0);
  CHECK(meta.at("max").get<double>() == 6.0);
  CHECK(meta.at("format").get<std::string>() == "pgm16-linear");

  SECTION("values beyond the mapping clamp instead of wrapping") {
    Plane q = Plane::constant(2, 1, 0.0);
    q.at(0, 0) = -100.0;
    q.at(1, 0) = 100.0;
    pctof::write_plane_pgm16(f.path, q, 2.0, 6.0);
    const std::string b2 = pctof::detail::read_file_bytes(f.path);
    const std::string h2 = "P5\n2 1\n65535\n";
    const auto s0 = (static_cast<unsigned>(static_cast<unsigned char>(b2[h2.size()])) << 8) |
                    static_cast<unsigned char>(b2[h2.size() + 1]);
    const auto s1 = (static_cast<unsigned>(static_cast<unsigned char>(b2[h2.size() + 2])) << 8) |
                    static_cast<unsigned char>(b2[h2.size() + 3]);
    CHECK(s0 == 0u);
    CHECK(s1 == 65535u);
  }
  SECTION("auto-scaled variant spans the finite extrema") {
    pctof::write_plane_pgm16(f.path, p);  // NaN ignored for the range
    const auto m = nlohmann::json::parse(pctof::detail::read_file_bytes(side.path));
    CHECK(m.at("min").get<double>() == 2.0);
    CHECK(m.at("max").get<double>() == 6.0);
  }
  SECTION("degenerate mapping is rejected") {
    CHECK_THROWS_AS(pctof::write_plane_pgm16(f.path, p, 6.0, 6.0),
                    pctof::DomainError);
  }
}

TEST_CASE("writes into unreachable paths fail loudly") {
  const Plane p = Plane::constant(2, 2, 1.0);
  CHECK_THROWS_AS(pctof::write_plane_csv("no_such_dir/x.csv", p), pctof::IoError);
  CHECK_THROWS_AS(pctof::write_plane_pfm("no_such_dir/x.pfm", p), pctof::IoError);
}
