#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nullknot/core.hpp"
#include "nullknot/fieldlines.hpp"

// Snapshot (binary), VTK legacy ASCII, and field-line CSV writers.  All
// writes are atomic: data goes to a sibling temp file which is renamed over
// the target only after a successful close.
//
// Snapshot layout (normative, little-endian):
//   32-byte header: magic "NKF1" | u32 N | f64 L | f64 t | 8 zero bytes
//   then N^3 x 3 complex values as interleaved f64 (re, im),
//   component-fastest, then z, then y, then x.

namespace nullknot {

namespace detail {

inline void atomic_write(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("rename failed: " + path);
  }
}

template <class T>
void append_raw(std::string& buf, const T& v) {
  const char* p = reinterpret_cast<const char*>(&v);
  buf.append(p, sizeof(T));
}

}  // namespace detail

constexpr char kSnapshotMagic[4] = {'N', 'K', 'F', '1'};
constexpr std::size_t kSnapshotHeaderSize = 32;

inline void save_snapshot(const std::string& path, const GridField& g) {
  g.spec.validate();
  std::string buf;
  buf.reserve(kSnapshotHeaderSize + g.f.size() * sizeof(Vec3C));
  buf.append(kSnapshotMagic, 4);
  const std::uint32_t n = std::uint32_t(g.spec.N);
  detail::append_raw(buf, n);
  detail::append_raw(buf, g.spec.L);
  detail::append_raw(buf, g.spec.t);
  buf.append(kSnapshotHeaderSize - buf.size(), '\0');
  // GridField memory is already component-fastest then z, y, x:
  // Vec3C = 3 contiguous (re, im) pairs, z the fastest index.
  static_assert(sizeof(Vec3C) == 6 * sizeof(double));
  buf.append(reinterpret_cast<const char*>(g.f.data()), g.f.size() * sizeof(Vec3C));
  detail::atomic_write(path, buf);
}

inline GridField load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot: " + path);
  char header[kSnapshotHeaderSize];
  in.read(header, kSnapshotHeaderSize);
  if (!in) throw IoError("truncated snapshot header: " + path);
  if (std::memcmp(header, kSnapshotMagic, 4) != 0)
    throw IoError("bad snapshot magic: " + path);
  std::uint32_t n = 0;
  GridSpec spec;
  std::memcpy(&n, header + 4, sizeof(n));
  std::memcpy(&spec.L, header + 8, sizeof(double));
  std::memcpy(&spec.t, header + 16, sizeof(double));
  spec.N = int(n);
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw IoError("invalid snapshot header (" + std::string(e.what()) + "): " + path);
  }
  GridField g = make_grid(spec);
  in.read(reinterpret_cast<char*>(g.f.data()), std::streamsize(g.f.size() * sizeof(Vec3C)));
  if (!in || in.gcount() != std::streamsize(g.f.size() * sizeof(Vec3C)))
    throw IoError("truncated snapshot data: " + path);
  char extra;
  if (in.read(&extra, 1)) throw IoError("trailing bytes in snapshot: " + path);
  return g;
}

/// VTK legacy ASCII structured points with three vector arrays: E, B, and the
/// Poynting flow V = E x B / W (zeroed where W is below `w_floor` of the box
/// maximum).
inline void write_vtk(const std::string& path, const GridField& g, double w_floor = 1e-12) {
  g.spec.validate();
  const int n = g.spec.N;
  std::ostringstream out;
  out.precision(9);
  out << "# vtk DataFile Version 3.0\n";
  out << "nullknot snapshot t=" << g.spec.t << "\n";
  out << "ASCII\n";
  out << "DATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << n << " " << n << " " << n << "\n";
  out << "ORIGIN " << -g.spec.L << " " << -g.spec.L << " " << -g.spec.L << "\n";
  out << "SPACING " << g.spec.spacing() << " " << g.spec.spacing() << " " << g.spec.spacing()
      << "\n";
  out << "POINT_DATA " << g.spec.points() << "\n";

  double w_max = 0;
  for (const Vec3C& v : g.f) {
    const Vec3R E = real(v), B = imag(v);
    w_max = std::max(w_max, 0.5 * (dot(E, E) + dot(B, B)));
  }

  // VTK structured points expect x fastest; our storage is z fastest.
  auto each_point = [&](auto&& fn) {
    for (int iz = 0; iz < n; ++iz)
      for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) fn(g.at(ix, iy, iz));
  };
  auto emit = [&](const char* name, auto&& pick) {
    out << "VECTORS " << name << " double\n";
    each_point([&](const Vec3C& v) {
      const Vec3R w = pick(v);
      out << w.x << " " << w.y << " " << w.z << "\n";
    });
  };
  emit("E", [](const Vec3C& v) { return real(v); });
  emit("B", [](const Vec3C& v) { return imag(v); });
  emit("V", [&](const Vec3C& v) {
    const Vec3R E = real(v), B = imag(v);
    const double W = 0.5 * (dot(E, E) + dot(B, B));
    if (w_max == 0.0 || W < w_floor * w_max) return Vec3R{};
    return cross(E, B) / W;
  });

  detail::atomic_write(path, out.str());
}

/// CSV: s, x, y, z, |X|, W, Re_ab, Im_ab.  The first-integral columns are
/// blank when the line was traced without a BatemanPair.
inline void write_line_csv(const std::string& path, const FieldLine& line) {
  std::ostringstream out;
  out.precision(17);
  out << "s,x,y,z,mag,W,Re_ab,Im_ab\n";
  for (const LineVertex& v : line.vertices) {
    out << v.s << "," << v.x.x << "," << v.x.y << "," << v.x.z << "," << v.magnitude << ","
        << v.W << ",";
    if (std::isnan(v.re_ab))
      out << ",";
    else
      out << v.re_ab << "," << v.im_ab;
    out << "\n";
  }
  detail::atomic_write(path, out.str());
}

}  // namespace nullknot
