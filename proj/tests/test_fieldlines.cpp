#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nullknot/bateman.hpp"
#include "nullknot/fields.hpp"
#include "nullknot/fieldlines.hpp"

using namespace nullknot;
using Catch::Approx;

namespace {

/// B = (0,0,1) everywhere (encoded as F = iB so the imaginary part carries it).
AnalyticField uniform_b() {
  return make_analytic_field("uniform_b", [](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    (void)t; (void)x; (void)y; (void)z;
    return Vec3<S>{S(Complex(0)), S(Complex(0)), S(Complex(0, 1))};
  });
}

/// B = (-y, x, 0): circular field lines about the z-axis.
AnalyticField circular_b() {
  return make_analytic_field("circular_b", [](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    (void)t; (void)z;
    const Complex i(0, 1);
    return Vec3<S>{-i * y, i * x, S(Complex(0))};
  });
}

/// Largest |grad(ab)| over the line's vertices (drift tolerance scale).
double gradient_scale(const FieldLine& line, const BatemanPair& pair, double t) {
  double scale = 0;
  for (const LineVertex& v : line.vertices) {
    const PairJet1 j = pair.jet1(at(t, v.x));
    const Vec3C g = j.a * j.db.r + j.b * j.da.r;
    scale = std::max(scale, norm(g));
  }
  return scale;
}

}  // namespace

TEST_CASE("uniform field: straight segment of the requested length") {
  TracerConfig cfg;
  cfg.max_arc_length = 2.0;
  const FieldLine line = trace(uniform_b(), {0, 0, 0}, 0.0, cfg);

  REQUIRE(line.vertices.size() >= 2);
  CHECK(line.stop_reason == "max-arc-length");
  CHECK_FALSE(line.closed);
  const Vec3R end = line.vertices.back().x;
  CHECK(norm(end - Vec3R{0, 0, 2}) <= 1e-9);
  for (std::size_t i = 0; i < line.vertices.size(); ++i) {
    CHECK(std::abs(line.vertices[i].x.x) <= 1e-12);
    CHECK(std::abs(line.vertices[i].x.y) <= 1e-12);
    CHECK(line.vertices[i].magnitude == Approx(1.0));
    CHECK(line.vertices[i].W == Approx(0.5));
    if (i > 0) CHECK(line.vertices[i].s > line.vertices[i - 1].s);
  }
}

TEST_CASE("circular field: unit circle closes") {
  TracerConfig cfg;
  cfg.max_arc_length = 2.0 * M_PI;
  const FieldLine line = trace(circular_b(), {1, 0, 0}, 0.0, cfg);

  CHECK(line.closed);
  CHECK(line.return_distance <= 1e-6);
  // closure refinement walks in eps_close-sized steps, so the reported period
  // is quantized at that scale
  CHECK(line.length() == Approx(2.0 * M_PI).margin(1e-3));
  for (const LineVertex& v : line.vertices)
    CHECK(norm(v.x) == Approx(1.0).margin(1e-8));
}

TEST_CASE("tracer convergence under tolerance halving") {
  // On the circular field a vertex at arc s sits at (cos s, sin s, 0)
  // exactly; compare each run against that at its own tolerance.  (Hausdorff
  // between the two polylines would only measure chord sagitta, not
  // integration accuracy.)
  auto worst_error = [](const FieldLine& line) {
    double worst = 0;
    for (const LineVertex& v : line.vertices)
      worst = std::max(worst, norm(v.x - Vec3R{std::cos(v.s), std::sin(v.s), 0.0}));
    return worst;
  };
  TracerConfig loose;
  loose.max_arc_length = 2.0 * M_PI - 0.05;  // stay clear of the closure event
  TracerConfig tight = loose;
  tight.rel_tol = loose.rel_tol / 2.0;
  tight.abs_tol = loose.abs_tol / 2.0;
  const double e_loose = worst_error(trace(circular_b(), {1, 0, 0}, 0.0, loose));
  const double e_tight = worst_error(trace(circular_b(), {1, 0, 0}, 0.0, tight));
  CHECK(e_loose <= 10.0 * loose.rel_tol);
  CHECK(e_tight <= 10.0 * tight.rel_tol);
}

TEST_CASE("degenerate seed is rejected") {
  CHECK_THROWS_AS(trace(zero_field(), {0.3, 0.1, 0.0}, 0.0, {}), DegenerateSeedError);
}

TEST_CASE("reversibility: tracing backward returns to the seed") {
  TracerConfig fwd;
  fwd.max_arc_length = 3.0;
  const FieldLine out = trace(circular_b(), {1, 0, 0}, 0.0, fwd);
  TracerConfig back = fwd;
  back.direction = -1.0;
  const FieldLine ret = trace(circular_b(), out.vertices.back().x, 0.0, back);
  CHECK(norm(ret.vertices.back().x - Vec3R{1, 0, 0}) <= 1e-6);
}

TEST_CASE("family B-line: golden geometry and first-integral drift") {
  const BatemanPair pair = knotted_family_pair({1, 1});
  const AnalyticField fam = knotted_family({1, 1});

  TracerConfig cfg;
  cfg.selector = Selector::B;
  const FieldLine line = trace(fam, {0.5, 0, 0}, 0.0, cfg, &pair);

  REQUIRE(line.vertices.size() >= 10);
  CHECK(line.length() > 1.0);
  // (1,1) field lines are circles of the Hopf fibration: the trace closes.
  CHECK(line.closed);
  INFO("return distance " << line.return_distance << ", length " << line.length());

  // B . grad(Re{ab}) = 0: Re{ab} is a first integral of B-lines.
  const double scale = gradient_scale(line, pair, 0.0);
  const double drift_re = first_integral_drift(line, pair, 0.0, Integral::Re);
  CHECK(drift_re <= 1e-6 * scale * line.length());

  // Recorded per-vertex values agree with the recomputed drift.
  double recorded = 0;
  for (const LineVertex& v : line.vertices)
    recorded = std::max(recorded, std::abs(v.re_ab - line.vertices.front().re_ab));
  CHECK(recorded == Approx(drift_re).margin(1e-15));
}

TEST_CASE("family E-line conserves Im{ab}") {
  const BatemanPair pair = knotted_family_pair({1, 1});
  const AnalyticField fam = knotted_family({1, 1});

  TracerConfig cfg;
  cfg.selector = Selector::E;
  const FieldLine line = trace(fam, {0.5, 0, 0}, 0.0, cfg, &pair);
  REQUIRE(line.length() > 1.0);
  const double scale = gradient_scale(line, pair, 0.0);
  CHECK(first_integral_drift(line, pair, 0.0, Integral::Im) <= 1e-6 * scale * line.length());
}

TEST_CASE("first-integral drift scales with tracer tolerance") {
  const BatemanPair pair = knotted_family_pair({1, 1});
  const AnalyticField fam = knotted_family({1, 1});

  TracerConfig tight;
  tight.selector = Selector::B;
  TracerConfig loose = tight;
  loose.rel_tol = 1e-6;
  loose.abs_tol = 1e-9;

  const double d_tight =
      first_integral_drift(trace(fam, {0.5, 0, 0}, 0.0, tight), pair, 0.0, Integral::Re);
  const double d_loose =
      first_integral_drift(trace(fam, {0.5, 0, 0}, 0.0, loose), pair, 0.0, Integral::Re);
  CHECK(d_tight <= d_loose + 1e-12);
}

TEST_CASE("constant pair has zero drift") {
  const BatemanPair constant = make_bateman_pair("constant", [](auto t, auto x, auto y, auto z) {
    using S = decltype(t);
    (void)t; (void)x; (void)y; (void)z;
    return std::pair<S, S>{S(Complex(0.3, 0.4)), S(Complex(-1.0, 0.2))};
  });
  const FieldLine line = trace(circular_b(), {1, 0, 0}, 0.0, {});
  CHECK(first_integral_drift(line, constant, 0.0, Integral::Re) == 0.0);
  CHECK(first_integral_drift(line, constant, 0.0, Integral::Im) == 0.0);
}

TEST_CASE("polyline hausdorff basics") {
  const std::vector<Vec3R> a{{0, 0, 0}, {1, 0, 0}};
  const std::vector<Vec3R> b{{0, 0.5, 0}, {1, 0.5, 0}};
  CHECK(polyline_hausdorff(a, b) == Approx(0.5).margin(1e-12));
  CHECK(polyline_hausdorff(a, a) <= 1e-15);
  // Dense sampling beats vertex-to-vertex comparison: a midpoint-refined copy
  // of the same segment is at distance ~0, not half a segment.
  const std::vector<Vec3R> c{{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}};
  CHECK(polyline_hausdorff(a, c) <= 1e-15);
}

TEST_CASE("transported line mismatch") {
  SECTION("plane wave translates rigidly") {
    TracerConfig cfg;
    cfg.max_arc_length = 2.0;
    CHECK(transported_line_mismatch(plane_wave(), {0, 0, 0}, 0.3, cfg) <= 1e-9);
  }
  SECTION("tau = 0 is the identity") {
    TracerConfig cfg;
    cfg.max_arc_length = 2.0;
    CHECK(transported_line_mismatch(plane_wave(), {0, 0, 0}, 0.0, cfg) <= 1e-9);
  }
  SECTION("the (1,1) family line is transported by the straight-line flow") {
    const double mismatch = transported_line_mismatch(knotted_family({1, 1}), {0.5, 0, 0}, 0.25);
    TracerConfig cfg;
    cfg.selector = Selector::BoverW;
    const double len = trace(knotted_family({1, 1}), {0.5, 0, 0}, 0.0, cfg).length();
    INFO("mismatch " << mismatch << " over length " << len);
    CHECK(mismatch <= 1e-3 * len);
  }
}
