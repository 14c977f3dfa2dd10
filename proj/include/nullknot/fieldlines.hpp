#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nullknot/bateman.hpp"
#include "nullknot/core.hpp"

// Adaptive field-line tracing (arc-length parameterization, embedded
// Dormand-Prince 5(4) pair), first-integral drift along traced lines, and the
// transport check: advect a traced B/W line by the straight-line Poynting map
// x -> x + tau V0(x) and compare with the line re-traced at t = tau.

namespace nullknot {

enum class Selector { E, B, V, BoverW, EoverW };

inline const char* selector_name(Selector s) {
  switch (s) {
    case Selector::E: return "E";
    case Selector::B: return "B";
    case Selector::V: return "V";
    case Selector::BoverW: return "B/W";
    case Selector::EoverW: return "E/W";
  }
  return "?";
}

struct TracerConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_arc_length = 20.0;
  int max_steps = 100000;
  double initial_step = 1e-2;
  Selector selector = Selector::B;
  double direction = +1.0;  // -1 traces against the field

  void validate() const {
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw ConfigError("TracerConfig: tolerances must be positive");
    if (max_steps < 1) throw ConfigError("TracerConfig: max_steps must be >= 1");
    if (!(max_arc_length > 0)) throw ConfigError("TracerConfig: max arc length must be positive");
  }
};

struct LineVertex {
  double s{};          // cumulative arc length
  Vec3R x;
  double magnitude{};  // |selected vector|
  double W{};
  double re_ab{}, im_ab{};  // first integrals, NaN without an attached pair
};

struct FieldLine {
  std::vector<LineVertex> vertices;
  bool closed{};
  double return_distance{};  // |last vertex - seed|
  std::string stop_reason;   // "max-arc-length" | "max-steps" | "closure" | "degenerate-field"

  double length() const { return vertices.empty() ? 0.0 : vertices.back().s; }
};

namespace detail {

constexpr double kDegenerateVector = 1e-12;
constexpr double kCloseDistance = 1e-4;
constexpr double kCloseTangent = 0.999;
constexpr double kCaptureDistance = 1e-3;  // segment-to-seed radius that triggers refinement

inline Vec3R selected_vector(const AnalyticField& field, Selector sel, const Point4& p,
                             double* w_out = nullptr) {
  const Vec3C F = field.value(p);
  const Vec3R E = real(F), B = imag(F);
  const double W = 0.5 * (dot(E, E) + dot(B, B));
  if (w_out) *w_out = W;
  switch (sel) {
    case Selector::E: return E;
    case Selector::B: return B;
    case Selector::V:
    case Selector::BoverW:
    case Selector::EoverW: {
      if (W < kDegenerateVector)
        return {};  // degenerate; caller checks the magnitude
      if (sel == Selector::V) return cross(E, B) / W;
      return (sel == Selector::BoverW ? B : E) / W;
    }
  }
  return {};
}

inline double point_segment_distance(const Vec3R& p, const Vec3R& a, const Vec3R& b) {
  const Vec3R ab = b - a;
  const double len2 = dot(ab, ab);
  double u = len2 == 0.0 ? 0.0 : dot(p - a, ab) / len2;
  u = std::clamp(u, 0.0, 1.0);
  return norm(p - (a + u * ab));
}

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // 4th-order embedded weights
  static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                          e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

}  // namespace detail

/// Trace the field line of the selected vector through `seed` at time `t`,
/// integrating dx/ds = X(x)/|X(x)|.  If `pair` is given, the first integrals
/// Re{ab}, Im{ab} are recorded per vertex.
inline FieldLine trace(const AnalyticField& field, const Vec3R& seed, double t,
                       const TracerConfig& cfg = {}, const BatemanPair* pair = nullptr) {
  cfg.validate();
  using detail::Dopri5;

  auto rhs = [&](const Vec3R& x) -> Vec3R {
    const Vec3R X = detail::selected_vector(field, cfg.selector, at(t, x));
    const double m = norm(X);
    if (m < detail::kDegenerateVector) throw DegenerateFlowError("field line hit a degenerate point");
    return cfg.direction * X / m;
  };

  FieldLine line;
  auto push_vertex = [&](double s, const Vec3R& x) {
    LineVertex v;
    v.s = s;
    v.x = x;
    double W = 0;
    v.magnitude = norm(detail::selected_vector(field, cfg.selector, at(t, x), &W));
    v.W = W;
    if (pair) {
      const auto [re, im] = first_integrals(*pair, at(t, x));
      v.re_ab = re;
      v.im_ab = im;
    } else {
      v.re_ab = v.im_ab = std::numeric_limits<double>::quiet_NaN();
    }
    line.vertices.push_back(v);
  };

  {
    double W = 0;
    const Vec3R X0 = detail::selected_vector(field, cfg.selector, at(t, seed), &W);
    if (norm(X0) < detail::kDegenerateVector)
      throw DegenerateSeedError("trace: selected vector degenerate at the seed (" +
                                std::string(selector_name(cfg.selector)) + ")");
  }

  Vec3R x = seed;
  Vec3R k1 = rhs(x);
  const Vec3R tangent0 = k1;
  double s = 0, h = std::min(cfg.initial_step, cfg.max_arc_length);
  push_vertex(0.0, x);
  line.stop_reason = "max-steps";

  for (int step = 0; step < cfg.max_steps; ++step) {
    if (s >= cfg.max_arc_length) {
      line.stop_reason = "max-arc-length";
      break;
    }
    h = std::min(h, cfg.max_arc_length - s);
    const Vec3R x_prev = x;
    const double s_prev = s;

    Vec3R k2, k3, k4, k5, k6, k7, x5;
    bool degenerate = false;
    int rejects = 0;
    while (true) {
      try {
        k2 = rhs(x + h * (Dopri5::a21 * k1));
        k3 = rhs(x + h * (Dopri5::a31 * k1 + Dopri5::a32 * k2));
        k4 = rhs(x + h * (Dopri5::a41 * k1 + Dopri5::a42 * k2 + Dopri5::a43 * k3));
        k5 = rhs(x + h * (Dopri5::a51 * k1 + Dopri5::a52 * k2 + Dopri5::a53 * k3 +
                          Dopri5::a54 * k4));
        k6 = rhs(x + h * (Dopri5::a61 * k1 + Dopri5::a62 * k2 + Dopri5::a63 * k3 +
                          Dopri5::a64 * k4 + Dopri5::a65 * k5));
        x5 = x + h * (Dopri5::b1 * k1 + Dopri5::b3 * k3 + Dopri5::b4 * k4 + Dopri5::b5 * k5 +
                      Dopri5::b6 * k6);
        k7 = rhs(x5);
      } catch (const DegenerateFlowError&) {
        degenerate = true;
        break;
      } catch (const PoleError&) {
        degenerate = true;
        break;
      }
      const Vec3R x4 = x + h * (Dopri5::e1 * k1 + Dopri5::e3 * k3 + Dopri5::e4 * k4 +
                                Dopri5::e5 * k5 + Dopri5::e6 * k6 + Dopri5::e7 * k7);
      const Vec3R diff = x5 - x4;
      double err = 0;
      for (int i = 0; i < 3; ++i)
        err = std::max(err, std::abs(diff[i]) / (cfg.abs_tol + cfg.rel_tol * std::abs(x5[i])));
      if (err <= 1.0) {
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        x = x5;
        s += h;
        k1 = k7;  // FSAL
        h *= grow;
        break;
      }
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
      if (h < 1e-14 || ++rejects > 60)
        throw StepFailureError("trace: step control could not meet the tolerance");
    }
    if (degenerate) {
      line.stop_reason = "degenerate-field";
      break;
    }
    push_vertex(s, x);

    // Closure event: the accepted segment passed near the seed.  Adaptive
    // steps essentially never *land* within eps_close of the seed, so when a
    // segment comes within the capture radius, re-walk it with small
    // fixed-step RK4 and take the closest approach.
    const double capture =
        std::max(detail::kCaptureDistance, 0.5 * (s - s_prev));
    if (s_prev >= 10.0 * detail::kCloseDistance &&
        detail::point_segment_distance(seed, x_prev, x) <= capture) {
      const double hw = detail::kCloseDistance;
      const double walk_limit = (s - s_prev) + 2.0 * capture;
      std::vector<std::pair<double, Vec3R>> samples;  // (arc from x_prev, position)
      Vec3R xw = x_prev;
      bool walk_ok = true;
      auto rk4 = [&](const Vec3R& from, double step) {
        const Vec3R w1 = rhs(from);
        const Vec3R w2 = rhs(from + (0.5 * step) * w1);
        const Vec3R w3 = rhs(from + (0.5 * step) * w2);
        const Vec3R w4 = rhs(from + step * w3);
        return from + (step / 6.0) * (w1 + 2.0 * w2 + 2.0 * w3 + w4);
      };
      for (double arc = 0.0; arc <= walk_limit; arc += hw) {
        samples.emplace_back(arc, xw);
        try {
          xw = rk4(xw, hw);
        } catch (const Error&) {
          walk_ok = false;
          break;
        }
      }
      std::size_t imin = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = norm(samples[i].second - seed);
        if (d < best) {
          best = d;
          imin = i;
        }
      }
      Vec3R best_x = samples.empty() ? x_prev : samples[imin].second;
      double best_arc = samples.empty() ? 0.0 : samples[imin].first;
      // Refine: d^2(arc) is locally quadratic with unit curvature (unit-speed
      // curve), so a parabola through the three samples around the minimum
      // pins the closest approach far below the walk spacing.
      if (walk_ok && imin > 0 && imin + 1 < samples.size()) {
        const auto d2 = [&](std::size_t i) {
          const Vec3R r = samples[i].second - seed;
          return dot(r, r);
        };
        const double a0 = d2(imin - 1), a1 = d2(imin), a2 = d2(imin + 1);
        const double denom = a0 - 2.0 * a1 + a2;
        if (denom > 0) {
          const double shift = std::clamp(0.5 * (a0 - a2) / denom, -1.0, 1.0) * hw;
          try {
            const Vec3R refined = rk4(samples[imin].second, shift);
            if (norm(refined - seed) < best) {
              best = norm(refined - seed);
              best_x = refined;
              best_arc = samples[imin].first + shift;
            }
          } catch (const Error&) {
          }
        }
      }
      if (walk_ok && best <= detail::kCloseDistance) {
        Vec3R tan = tangent0;
        try {
          tan = rhs(best_x);
        } catch (const Error&) {
        }
        if (dot(tan, tangent0) >= detail::kCloseTangent) {
          if (best_arc > 0.0) {  // replace the overshooting endpoint
            line.vertices.pop_back();
            push_vertex(s_prev + best_arc, best_x);
          }
          line.closed = true;
          line.stop_reason = "closure";
          break;
        }
      }
    }
    if (s >= cfg.max_arc_length) {
      line.stop_reason = "max-arc-length";
      break;
    }
  }
  line.return_distance = line.vertices.empty() ? 0.0 : norm(line.vertices.back().x - seed);
  return line;
}

enum class Integral { Re, Im };

/// max_vertices |s(vertex) - s(start)| for s = Re{ab} or Im{ab}.
inline double first_integral_drift(const FieldLine& line, const BatemanPair& pair, double t,
                                   Integral which) {
  double drift = 0;
  if (line.vertices.empty()) return 0;
  const auto pick = [&](const Vec3R& x) {
    const auto [re, im] = first_integrals(pair, at(t, x));
    return which == Integral::Re ? re : im;
  };
  const double s0 = pick(line.vertices.front().x);
  for (const LineVertex& v : line.vertices) drift = std::max(drift, std::abs(pick(v.x) - s0));
  return drift;
}

namespace detail {

inline double point_polyline_distance(const Vec3R& p, const std::vector<Vec3R>& poly) {
  double best = std::numeric_limits<double>::infinity();
  if (poly.size() == 1) return norm(p - poly[0]);
  for (std::size_t i = 0; i + 1 < poly.size(); ++i)
    best = std::min(best, point_segment_distance(p, poly[i], poly[i + 1]));
  return best;
}

/// `count` points at uniform arc-length spacing along the polyline.
inline std::vector<Vec3R> resample_polyline(const std::vector<Vec3R>& poly, int count) {
  if (poly.size() < 2) return poly;
  std::vector<double> s(poly.size(), 0.0);
  for (std::size_t i = 1; i < poly.size(); ++i) s[i] = s[i - 1] + norm(poly[i] - poly[i - 1]);
  const double total = s.back();
  std::vector<Vec3R> out;
  out.reserve(count);
  std::size_t seg = 0;
  for (int i = 0; i < count; ++i) {
    const double target = total * i / (count - 1);
    while (seg + 2 < poly.size() && s[seg + 1] < target) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double u = len == 0.0 ? 0.0 : (target - s[seg]) / len;
    out.push_back(poly[seg] + u * (poly[seg + 1] - poly[seg]));
  }
  return out;
}

}  // namespace detail

/// Symmetric (Hausdorff) distance between two polylines, each side measured
/// from a dense uniform arc-length resampling against the other's segments.
inline double polyline_hausdorff(const std::vector<Vec3R>& a, const std::vector<Vec3R>& b,
                                 int samples = 512) {
  if (a.empty() || b.empty()) throw ConfigError("polyline_hausdorff: empty polyline");
  double worst = 0;
  for (const Vec3R& p : detail::resample_polyline(a, samples))
    worst = std::max(worst, detail::point_polyline_distance(p, b));
  for (const Vec3R& p : detail::resample_polyline(b, samples))
    worst = std::max(worst, detail::point_polyline_distance(p, a));
  return worst;
}

inline std::vector<Vec3R> line_points(const FieldLine& line) {
  std::vector<Vec3R> pts;
  pts.reserve(line.vertices.size());
  for (const LineVertex& v : line.vertices) pts.push_back(v.x);
  return pts;
}

/// Advect the t = 0 line of B/W vertexwise by the straight-line Poynting map
/// x -> x + tau V0(x), re-trace the B/W line at t = tau from the advected
/// seed, and return the Hausdorff distance between the two polylines.  The
/// straight-line map is exact for null shear-free fields, so the mismatch is
/// a direct transport check.
inline double transported_line_mismatch(const AnalyticField& field, const Vec3R& seed, double tau,
                                        TracerConfig cfg = {}) {
  cfg.selector = Selector::BoverW;
  const FieldLine base = trace(field, seed, 0.0, cfg);

  std::vector<Vec3R> advected;
  advected.reserve(base.vertices.size());
  for (const LineVertex& v : base.vertices) {
    double W = 0;
    const Vec3R V0 = detail::selected_vector(field, Selector::V, at(0.0, v.x), &W);
    if (W < detail::kDegenerateVector)
      throw DegenerateFlowError("transported_line_mismatch: W degenerate on the base line");
    advected.push_back(v.x + tau * V0);
  }

  const FieldLine later = trace(field, advected.front(), tau, cfg);
  return polyline_hausdorff(advected, line_points(later));
}

}  // namespace nullknot
