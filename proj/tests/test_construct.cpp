#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nullknot/bateman.hpp"
#include "nullknot/construct.hpp"
#include "nullknot/diagnostics.hpp"
#include "nullknot/probes.hpp"

using namespace nullknot;
using Catch::Approx;

namespace {

/// psi = x + iy: u = x + iy, v = 1.  Simplest nontrivial map with hand-sized
/// values at (1,0,0).
RationalMap linear_map() {
  RationalMap m;
  m.name = "linear";
  m.u.terms = {{Complex(1, 0), 1, 0, 0}, {Complex(0, 1), 0, 1, 0}};
  m.v.terms = {{Complex(1, 0), 0, 0, 0}};
  return m;
}

RationalMap constant_map() {
  RationalMap m;
  m.name = "constant";
  m.u.terms = {{Complex(2, 1), 0, 0, 0}};
  m.v.terms = {{Complex(1, 0), 0, 0, 0}};
  return m;
}

}  // namespace

TEST_CASE("trig profile evaluation against direct trigonometry") {
  // 2 chi^2 sin(3 eta) - 0.5 cos(eta) + 1 at chi = 0.3, eta = 0.7
  TrigPoly p{{{2.0, 2, 3, true}, {-0.5, 0, 1, false}, {1.0, 0, 0, false}}};
  const double eta = 0.7;
  const Complex got = p.eval(Complex(0.3), std::exp(Complex(0, eta)));
  const double want = 2.0 * 0.09 * std::sin(3 * eta) - 0.5 * std::cos(eta) + 1.0;
  CHECK(got.real() == Approx(want).margin(1e-14));
  CHECK(std::abs(got.imag()) <= 1e-14);
  CHECK(p.needs_eta());
  CHECK_FALSE(TrigPoly::constant(2.0).needs_eta());
}

TEST_CASE("chi_eta hand values on the Hopf map") {
  // psi = 1 at (0, 1+sqrt(2), 0): |u| = |v| and u v-bar real positive.
  {
    const auto [chi, eta] = chi_eta(hopf_map(), {0.0, 1.0 + std::sqrt(2.0), 0.0});
    CHECK(chi == Approx(0.5).margin(1e-12));
    CHECK(eta == Approx(0.0).margin(1e-12));
  }
  // psi = i at (sqrt(2)-1, 0, 0).
  {
    const auto [chi, eta] = chi_eta(hopf_map(), {std::sqrt(2.0) - 1.0, 0.0, 0.0});
    CHECK(chi == Approx(0.5).margin(1e-12));
    CHECK(eta == Approx(M_PI / 2.0).margin(1e-12));
  }
  // Near the pole circle (v = 0 at r = 1, z = 0) chi tends to 1.
  {
    const auto [chi, eta] = chi_eta(hopf_map(), {1.0 + 1e-6, 0.0, 0.0});
    CHECK(chi > 1.0 - 1e-10);
    (void)eta;
  }
}

TEST_CASE("chi_eta throws at zeros and poles of psi") {
  CHECK_THROWS_AS(chi_eta(hopf_map(), {0.0, 0.0, 2.0}), ZeroPsiError);   // u = 0
  CHECK_THROWS_AS(chi_eta(hopf_map(), {1.0, 0.0, 0.0}), ZeroPsiError);   // v = 0
}

TEST_CASE("knotted_B hand value for psi = x + iy") {
  // grad(chi) x grad(eta) = 2 (1,0,0) x (0,1,0) / D^2 with D = x^2+y^2+1 = 2.
  const Vec3R B = knotted_B(linear_map(), {}, {1.0, 0.0, 0.0});
  CHECK(B.x == Approx(0.0).margin(1e-14));
  CHECK(B.y == Approx(0.0).margin(1e-14));
  CHECK(B.z == Approx(0.5).margin(1e-14));
}

TEST_CASE("knotted_B is divergence-free") {
  SECTION("default profile, Hopf map") {
    const AnalyticField b = knotted_B_field(hopf_map(), {});
    for (const Vec3R& x : probe_points(11, 100, 2.0)) {
      const FieldJet1 j = b.jet1(at(0.0, x));
      const Mat3R J = real(j.J);
      CHECK(std::abs(trace(J)) <= 1e-9 * (3.0 * max_abs(J) + kResidualFloor));
    }
  }
  SECTION("eta-dependent profile, Hopf map") {
    // div(f(chi,eta) grad chi x grad eta) = 0 for any profile f.
    ProfileFunctions p;
    p.f = TrigPoly{{{1.0, 0, 0, false}, {0.7, 1, 2, false}, {0.3, 2, 1, true}}};
    const AnalyticField b = knotted_B_field(hopf_map(), p);
    for (const Vec3R& x : probe_points(12, 50, 2.0)) {
      const FieldJet1 j = b.jet1(at(0.0, x));
      const Mat3R J = real(j.J);
      CHECK(std::abs(trace(J)) <= 1e-9 * (3.0 * max_abs(J) + kResidualFloor));
    }
  }
}

TEST_CASE("knotted_B with an eta profile throws on the psi zero axis") {
  ProfileFunctions p;
  p.f = TrigPoly{{{1.0, 0, 1, false}}};  // cos(eta)
  CHECK_THROWS_AS(knotted_B(hopf_map(), p, {0.0, 0.0, 1.5}), ZeroPsiError);
}

TEST_CASE("perpendicular_V") {
  SECTION("hand value for psi = x + iy") {
    // grad(chi) at (1,0,0) is (1/2, 0, 0); defaults g = 1, h = 0.
    const Vec3R V = perpendicular_V(linear_map(), {}, {1.0, 0.0, 0.0});
    CHECK(V.x == Approx(1.0).margin(1e-14));
    CHECK(V.y == Approx(0.0).margin(1e-14));
    CHECK(V.z == Approx(0.0).margin(1e-14));
  }
  SECTION("zero profiles are degenerate") {
    ProfileFunctions p;
    p.g = TrigPoly::constant(0.0);
    p.h = TrigPoly::constant(0.0);
    CHECK_THROWS_AS(perpendicular_V(hopf_map(), p, {1.0, 0.5, 0.2}), DegenerateDirectionError);
  }
  SECTION("V is unit and orthogonal to B for generic profiles") {
    ProfileFunctions p;
    p.g = TrigPoly{{{1.0, 0, 0, false}, {0.5, 1, 0, false}}};
    p.h = TrigPoly{{{0.25, 1, 0, false}}};
    for (const Vec3R& x : probe_points(13, 100, 2.0)) {
      const Vec3R V = perpendicular_V(hopf_map(), p, x);
      const Vec3R B = knotted_B(hopf_map(), p, x);
      CHECK(norm(V) == Approx(1.0).margin(1e-12));
      CHECK(std::abs(dot(V, B)) <= 1e-12 * (1.0 + norm(B)));
    }
  }
}

TEST_CASE("assembled initial data is null by construction") {
  const AnalyticField f = assembled_field(hopf_map(), {});
  for (const Vec3R& x : probe_points(14, 200, 2.0)) {
    const InitialTriple triple = assemble_initial_data(hopf_map(), {}, x);
    REQUIRE_FALSE(triple.degenerate);
    const Vec3C F = f.value(at(0.0, x));
    CHECK(norm(F - complexify(triple.E, triple.B)) <= 1e-12 * norm(F));
    // E.B = 0 and |E| = |B| to rounding
    CHECK(relative_null_residual(F) <= 1e-12);
  }
}

TEST_CASE("constant map is degenerate everywhere") {
  const InitialTriple triple = assemble_initial_data(constant_map(), {}, {0.3, -0.7, 1.1});
  CHECK(triple.degenerate);
  CHECK(norm(triple.B) == 0.0);
}

TEST_CASE("assemble_grid flags and zeroes degenerate points") {
  int degenerate = 0;
  const GridField g = assemble_grid(constant_map(), {}, {1.0, 8, 0.0}, &degenerate);
  CHECK(degenerate == 8 * 8 * 8);
  CHECK(grid_max_norm(g) == 0.0);

  // This grid hits the two critical sets of chi exactly: the z-axis
  // (chi = 0, 8 points) and the unit circle in z = 0 (chi = 1, 4 points).
  int degenerate2 = -1;
  const GridField h = assemble_grid(hopf_map(), {}, {2.0, 8, 0.0}, &degenerate2);
  CHECK(degenerate2 == 12);
  CHECK(grid_max_norm(h) > 0.0);
}

TEST_CASE("default Hopf profiles do not satisfy the shear-free requirement") {
  // The construction guarantees nullness only; the divergence and shear
  // conditions are residuals.  For the bundled defaults they are honestly
  // nonzero.
  double worst_shear = 0;
  for (const Vec3R& x : probe_points(15, 50, 1.5)) {
    const IcResiduals r = initial_condition_residuals(hopf_map(), {}, x);
    if (r.degenerate) continue;
    worst_shear = std::max({worst_shear, std::abs(r.sf1), std::abs(r.sf2)});
  }
  CHECK(worst_shear > 1e-3);
}

TEST_CASE("initial condition residuals flag degenerate points") {
  const IcResiduals r = initial_condition_residuals(constant_map(), {}, {0.1, 0.2, 0.3});
  CHECK(r.degenerate);
  CHECK(r.sf1 == 0.0);
}

TEST_CASE("nurowski_solve") {
  SECTION("zero seed gives the zero spinor") {
    const auto seed = make_holomorphic_seed("zero", [](auto p1, auto p2) {
      using S = decltype(p1);
      (void)p1;
      (void)p2;
      return S(Complex(0));
    });
    const auto [p1, p2] = nurowski_solve(seed, {1.0, 0.5, -0.3}, {0.1, 0.1});
    CHECK(std::abs(p1) <= 1e-12);
    CHECK(std::abs(p2) <= 1e-12);
  }
  SECTION("linear seed F = c phi1 solves in closed form") {
    const Complex c(0.8, -0.3);
    const auto seed = make_holomorphic_seed("linear", [c](auto p1, auto p2) {
      (void)p2;
      return c * p1;
    });
    // phi1 = c (x - iy)/r^2, phi2 = c z / r^2
    const Vec3R x{1.2, -0.4, 0.7};
    const double r2 = dot(x, x);
    const auto [p1, p2] = nurowski_solve(seed, x, {0.1, 0.1});
    CHECK(std::abs(p1 - c * Complex(x.x, -x.y) / r2) <= 1e-12);
    CHECK(std::abs(p2 - c * x.z / r2) <= 1e-12);
  }
  SECTION("quadratic seed: residual of the returned root") {
    const auto seed = make_holomorphic_seed("quad", [](auto p1, auto p2) {
      return 0.3 * p1 * p1 + 0.2 * p1 * p2 - 0.1 * p2 * p2 + 0.5 * p1;
    });
    const Vec3R x{0.9, 0.4, -0.6};
    const auto [p1, p2] = nurowski_solve(seed, x, {0.1, 0.1});
    const SeedJet j = seed.jet(p1, p2);
    const Complex R1 = Complex(x.x, x.y) * p1 + x.z * p2 - j.d1;
    const Complex R2 = -Complex(x.x, -x.y) * p2 + x.z * p1 - j.d2;
    CHECK(std::abs(R1) <= 1e-12);
    CHECK(std::abs(R2) <= 1e-12);
  }
  SECTION("singular Jacobian is reported") {
    const auto seed = make_holomorphic_seed("sing", [](auto p1, auto p2) {
      (void)p2;
      return 0.5 * p1 * p1;
    });
    CHECK_THROWS_AS(nurowski_solve(seed, {1.0, 0.0, 0.0}, {0.1, 0.1}), SingularJacobianError);
  }
}

TEST_CASE("known family pair is conjugate") {
  const ConjugatePair pair = known_family_pair_t0();
  CHECK(pair.provenance == "closed-form");
  for (const Vec3R& x : probe_points(16, 200, 2.0)) {
    const auto [mag, orth] = conjugacy_residuals(pair, x);
    CHECK(mag <= 1e-10);
    CHECK(orth <= 1e-10);
  }
}

TEST_CASE("conjugate pair from the linear seed") {
  const Complex c(0.8, -0.3);
  const auto seed = make_holomorphic_seed("linear", [c](auto p1, auto p2) {
    (void)p2;
    return c * p1;
  });
  const ConjugatePair pair = conjugate_pair_from_seed(seed);
  CHECK(pair.provenance == "nurowski-numeric");

  // Closed form: f + ig = -c^2 (x - iy)/r^2 (up to an additive constant).
  auto closed = [c](const Vec3R& x) {
    return -c * c * Complex(x.x, -x.y) / dot(x, x);
  };

  SECTION("gradient matches the closed form") {
    for (const Vec3R& x : probe_points(17, 30, 1.5)) {
      const Vec3R p{x.x, 0.8 + std::abs(x.y), 0.8 + std::abs(x.z)};  // keep the x-line off r = 0
      const double r2 = dot(p, p);
      const Vec3C g = pair.gradient(p);
      // d/dx of the closed form equals phi1^2 - phi2^2
      const Complex want_x = c * c * (2.0 * p.x * Complex(p.x, -p.y) - r2) / (r2 * r2);
      CHECK(std::abs(g.x - want_x) <= 1e-10 * (1.0 + std::abs(want_x)));
      const auto [mag, orth] = conjugacy_residuals(pair, p);
      CHECK(mag <= 1e-10);
      CHECK(orth <= 1e-10);
    }
  }
  SECTION("quadrature values match closed-form differences along a line") {
    const double y = 1.1, z = -0.9;
    const Complex offset = closed({-8.0, y, z});  // the anchor fixes C per line
    for (double xv : {-2.0, -0.5, 0.75, 2.5}) {
      const Complex got = pair.value({xv, y, z});
      const Complex want = closed({xv, y, z}) - offset;
      CHECK(std::abs(got - want) <= 1e-8 * (1.0 + std::abs(want)));
    }
  }
  SECTION("gradient x-component is consistent with the quadrature values") {
    const Vec3R p{0.6, 1.3, 0.8};
    const double h = 1e-4;
    const Complex fd = (pair.value({p.x + h, p.y, p.z}) - pair.value({p.x - h, p.y, p.z})) / (2 * h);
    CHECK(std::abs(fd - pair.gradient(p).x) <= 1e-6);
  }
  SECTION("zero seed gives the zero pair") {
    const auto zero_seed = make_holomorphic_seed("zero", [](auto p1, auto p2) {
      using S = decltype(p1);
      (void)p1;
      (void)p2;
      return S(Complex(0));
    });
    const ConjugatePair zp = conjugate_pair_from_seed(zero_seed);
    CHECK(std::abs(zp.value({1.0, 0.5, 0.5})) <= 1e-12);
    CHECK(norm(zp.gradient({1.0, 0.5, 0.5})) <= 1e-12);
  }
}

TEST_CASE("field from the known conjugate pair reproduces the (1,1) family") {
  const ConjugatePair pair = known_family_pair_t0();
  const AnalyticField fam = knotted_family({1, 1});
  // prefactor at t = 0: p = s^2 / q^3 with s = r^2 - 1 + 2iz, q = r^2 + 1
  auto prefactor = [](const Vec3R& x) {
    const Complex s = dot(x, x) - 1.0 + Complex(0, 2) * x.z;
    const Complex q = dot(x, x) + 1.0;
    return s * s / (q * q * q);
  };
  for (const Vec3R& x : probe_points(18, 100, 2.0)) {
    const Vec3C got = field_from_conjugate_pair(pair, prefactor, x);
    const Vec3C want = fam.value(at(0.0, x));
    CHECK(norm(got - want) <= 1e-10 * (1.0 + norm(want)));
  }

  auto zero_p = [](const Vec3R&) { return Complex(0); };
  CHECK(norm(field_from_conjugate_pair(pair, zero_p, {0.4, 0.3, 0.2})) == 0.0);
}

TEST_CASE("profile search never worsens the default residual score") {
  const auto points = probe_points(19, 8, 1.5);
  const ProfileSearchResult res = search_profiles(hopf_map(), points, 1);
  CHECK(std::isfinite(res.score));
  CHECK(res.score <= res.initial_score);
}
