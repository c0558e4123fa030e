#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "pctof/errors.hpp"

namespace pctof {

/// Row-major double image; row 0 is the top of the frame.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  static Plane constant(int w, int h, double value) {
    if (w <= 0 || h <= 0) throw DomainError("Plane: dimensions must be positive");
    Plane p;
    p.width = w;
    p.height = h;
    p.data.assign(static_cast<std::size_t>(w) * h, value);
    return p;
  }

  std::size_t size() const { return data.size(); }
  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  bool same_shape(const Plane& o) const {
    return width == o.width && height == o.height;
  }

  void validate() const {
    if (width <= 0 || height <= 0)
      throw DomainError("Plane: dimensions must be positive");
    if (data.size() != static_cast<std::size_t>(width) * height)
      throw DomainError("Plane: data size does not match dimensions");
  }
};

namespace detail {

/// Shortest round-trippable decimal form; identical bytes for identical
/// doubles, which is what makes CSV outputs reproducible.
inline void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

inline void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failed: " + path);
  return bytes;
}

inline float to_le_f32(double v) {
  float f = static_cast<float>(v);
  if constexpr (std::endian::native == std::endian::big) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    u = ((u & 0xff000000u) >> 24) | ((u & 0x00ff0000u) >> 8) |
        ((u & 0x0000ff00u) << 8) | ((u & 0x000000ffu) << 24);
    std::memcpy(&f, &u, 4);
  }
  return f;
}

}  // namespace detail

/// CSV: one text row per pixel row, comma-separated %.17g fields.
inline void write_plane_csv(const std::string& path, const Plane& plane) {
  plane.validate();
  std::string out;
  out.reserve(plane.size() * 20);
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      if (x) out += ',';
      detail::append_double(out, plane.at(x, y));
    }
    out += '\n';
  }
  detail::write_file_bytes(path, out);
}

inline Plane read_plane_csv(const std::string& path) {
  const std::string bytes = detail::read_file_bytes(path);
  Plane plane;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < bytes.size()) {
    std::size_t eol = bytes.find('\n', pos);
    if (eol == std::string::npos) eol = bytes.size();
    std::size_t end = eol;
    if (end > pos && bytes[end - 1] == '\r') --end;
    ++line_no;
    if (end == pos && eol == bytes.size()) break;  // trailing newline
    int field_no = 0;
    std::size_t fpos = pos;
    while (fpos <= end) {
      std::size_t fend = bytes.find(',', fpos);
      if (fend == std::string::npos || fend > end) fend = end;
      ++field_no;
      const std::string token = bytes.substr(fpos, fend - fpos);
      char* parse_end = nullptr;
      errno = 0;
      const double v = std::strtod(token.c_str(), &parse_end);
      if (token.empty() || parse_end != token.c_str() + token.size())
        throw FormatError(path + ": line " + std::to_string(line_no) +
                          ", field " + std::to_string(field_no) +
                          ": not a number: '" + token + "'");
      plane.data.push_back(v);
      if (fend == end) break;
      fpos = fend + 1;
    }
    if (line_no == 1) {
      plane.width = field_no;
    } else if (field_no != plane.width) {
      throw FormatError(path + ": line " + std::to_string(line_no) + ": expected " +
                        std::to_string(plane.width) + " fields, got " +
                        std::to_string(field_no));
    }
    ++plane.height;
    pos = eol + 1;
  }
  if (plane.width == 0 || plane.height == 0)
    throw FormatError(path + ": empty CSV");
  return plane;
}

/// Grayscale PFM, scale -1 (little-endian floats), scanlines bottom-to-top.
inline void write_plane_pfm(const std::string& path, const Plane& plane) {
  plane.validate();
  std::string out = "Pf\n" + std::to_string(plane.width) + " " +
                    std::to_string(plane.height) + "\n-1\n";
  out.reserve(out.size() + plane.size() * 4);
  for (int y = plane.height - 1; y >= 0; --y) {
    for (int x = 0; x < plane.width; ++x) {
      const float f = detail::to_le_f32(plane.at(x, y));
      char b[4];
      std::memcpy(b, &f, 4);
      out.append(b, 4);
    }
  }
  detail::write_file_bytes(path, out);
}

inline Plane read_plane_pfm(const std::string& path) {
  const std::string bytes = detail::read_file_bytes(path);
  std::size_t pos = 0;
  auto token = [&]() -> std::string {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos])))
      ++pos;
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos])))
      ++pos;
    if (start == pos)
      throw FormatError(path + ": truncated header at byte " + std::to_string(pos));
    return bytes.substr(start, pos - start);
  };
  const std::string magic = token();
  if (magic == "PF") throw FormatError(path + ": color PFM not supported");
  if (magic != "Pf") throw FormatError(path + ": not a PFM file (magic '" + magic + "')");
  Plane plane;
  try {
    plane.width = std::stoi(token());
    plane.height = std::stoi(token());
  } catch (const std::exception&) {
    throw FormatError(path + ": bad dimensions in header");
  }
  const std::string scale_tok = token();
  char* send = nullptr;
  const double scale = std::strtod(scale_tok.c_str(), &send);
  if (send != scale_tok.c_str() + scale_tok.size() || scale == 0.0)
    throw FormatError(path + ": bad scale '" + scale_tok + "'");
  if (plane.width <= 0 || plane.height <= 0)
    throw FormatError(path + ": non-positive dimensions");
  ++pos;  // single whitespace byte separates header from raster
  const std::size_t need = static_cast<std::size_t>(plane.width) * plane.height * 4;
  if (bytes.size() - pos < need)
    throw FormatError(path + ": raster truncated at byte " + std::to_string(bytes.size()) +
                      " (need " + std::to_string(pos + need) + ")");
  const bool file_le = scale < 0.0;
  plane.data.resize(static_cast<std::size_t>(plane.width) * plane.height);
  for (int y = plane.height - 1; y >= 0; --y) {
    for (int x = 0; x < plane.width; ++x) {
      std::uint32_t u;
      std::memcpy(&u, bytes.data() + pos, 4);
      pos += 4;
      const bool host_le = std::endian::native == std::endian::little;
      if (file_le != host_le)
        u = ((u & 0xff000000u) >> 24) | ((u & 0x00ff0000u) >> 8) |
            ((u & 0x0000ff00u) << 8) | ((u & 0x000000ffu) << 24);
      float f;
      std::memcpy(&f, &u, 4);
      plane.at(x, y) = static_cast<double>(f);
    }
  }
  return plane;
}

/// 16-bit binary PGM (big-endian samples per netpbm). Values map linearly
/// from [lo, hi] to [0, 65535]; non-finite pixels map to 0. The mapping is
/// recorded in a JSON sidecar at path + ".json" so the scaling is
/// recoverable.
inline void write_plane_pgm16(const std::string& path, const Plane& plane,
                              double lo, double hi) {
  plane.validate();
  if (!(hi > lo)) throw DomainError("write_plane_pgm16: need hi > lo");
  std::string out = "P5\n" + std::to_string(plane.width) + " " +
                    std::to_string(plane.height) + "\n65535\n";
  out.reserve(out.size() + plane.size() * 2);
  for (int y = 0; y < plane.height; ++y) {
    for (int x = 0; x < plane.width; ++x) {
      const double v = plane.at(x, y);
      unsigned q = 0;
      if (std::isfinite(v)) {
        const double t = (v - lo) / (hi - lo);
        const double s = std::clamp(t, 0.0, 1.0) * 65535.0;
        q = static_cast<unsigned>(std::lround(s));
      }
      out += static_cast<char>((q >> 8) & 0xff);
      out += static_cast<char>(q & 0xff);
    }
  }
  detail::write_file_bytes(path, out);
  std::string side = "{\n  \"format\": \"pgm16-linear\",\n  \"min\": ";
  detail::append_double(side, lo);
  side += ",\n  \"max\": ";
  detail::append_double(side, hi);
  side += "\n}\n";
  detail::write_file_bytes(path + ".json", side);
}

/// Auto-scaled variant using the finite min/max of the plane.
inline void write_plane_pgm16(const std::string& path, const Plane& plane) {
  plane.validate();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : plane.data) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) {
    lo = 0.0;
    hi = 1.0;
  } else if (lo == hi) {
    hi = lo + 1.0;
  }
  write_plane_pgm16(path, plane, lo, hi);
}

}  // namespace pctof
