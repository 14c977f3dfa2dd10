#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nullknot/core.hpp"

namespace nullknot {

// Deterministic probe sampling.  Generator: std::mt19937_64 (the sequence is
// pinned by the C++ standard), doubles from the top 53 bits, so seeded runs
// reproduce bit-exactly across platforms.

inline double uniform_unit(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;  // [0, 1)
}

/// `count` points uniform in [-half_width, half_width)^3.
inline std::vector<Vec3R> probe_points(std::uint64_t seed, int count, double half_width) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3R> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double x = (2.0 * uniform_unit(rng) - 1.0) * half_width;
    const double y = (2.0 * uniform_unit(rng) - 1.0) * half_width;
    const double z = (2.0 * uniform_unit(rng) - 1.0) * half_width;
    pts.push_back({x, y, z});
  }
  return pts;
}

/// Keep drawing until `count` points satisfy W(t, x)/W_ref >= w_rel_min.
/// W_ref is the max W over an initial candidate batch (caller-independent of
/// acceptance order: the batch size is fixed).
inline std::vector<Vec3R> healthy_probe_points(const AnalyticField& field, double t,
                                               std::uint64_t seed, int count, double half_width,
                                               double w_rel_min) {
  std::mt19937_64 rng(seed);
  auto draw = [&]() -> Vec3R {
    return {(2.0 * uniform_unit(rng) - 1.0) * half_width,
            (2.0 * uniform_unit(rng) - 1.0) * half_width,
            (2.0 * uniform_unit(rng) - 1.0) * half_width};
  };
  // Reference scale from a fixed 512-point batch.
  double w_ref = 0;
  std::vector<Vec3R> batch;
  for (int i = 0; i < 512; ++i) {
    const Vec3R r = draw();
    batch.push_back(r);
    const Vec3C F = field.value(at(t, r));
    w_ref = std::max(w_ref, 0.5 * norm(F) * norm(F));
  }
  std::vector<Vec3R> out;
  for (const Vec3R& r : batch) {
    if (int(out.size()) >= count) break;
    const Vec3C F = field.value(at(t, r));
    if (0.5 * norm(F) * norm(F) >= w_rel_min * w_ref) out.push_back(r);
  }
  int guard = 0;
  while (int(out.size()) < count && guard++ < 100000) {
    const Vec3R r = draw();
    const Vec3C F = field.value(at(t, r));
    if (0.5 * norm(F) * norm(F) >= w_rel_min * w_ref) out.push_back(r);
  }
  if (int(out.size()) < count)
    throw DegenerateFlowError("healthy_probe_points: could not find enough healthy points");
  return out;
}

}  // namespace nullknot
