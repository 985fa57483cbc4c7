#include <doctest.h>

#include "matube/geodesic.hpp"
#include "matube/sampling.hpp"
#include "oracles.hpp"

using namespace matube;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SpherePoint ray2(double x1, double x2, double phi) {
  SpherePoint p;
  p.base = vec2(x1, x2);
  p.ray = phi;
  p.canonicalize();
  return p;
}

const FinslerMetric kEuclid = FinslerMetric::euclidean(2);
const FinslerMetric kRanders = FinslerMetric::randers_drift(vec2(0.3, 0.0));
const FinslerMetric kConformal = FinslerMetric::conformal_mode(2, {1, 0}, 0.2, 0.0);

}  // namespace

TEST_CASE("flat families have vanishing spray") {
  for (const FinslerMetric& m : {kEuclid, kRanders}) {
    RealState s;
    s.x = vec2(0.4, 1.1);
    s.v = vec2(0.8, -0.6);
    const RealState d = spray_rhs<double>(m, s);
    CHECK((d.x - s.v).norm() == 0.0);
    CHECK(d.v.norm() <= 1e-14);
  }
}

TEST_CASE("conformal spray matches the symbolic formula") {
  // G = (grad sigma . v) v - |v|^2/2 grad sigma, an independent algebraic route
  const Vec x = vec2(kTwoPi / 4.0, 0.0);
  const Vec v = vec2(1.0, 0.0);
  const Vec G = spray_coefficients<double>(kConformal, x, v);
  const Vec Go = oracle::conformal_G({1, 0}, 0.2, 0.0, x, v);
  CHECK(G[0] == doctest::Approx(-0.1).epsilon(1e-10));  // hand value at x1 = pi/2
  CHECK((G - Go).norm() <= 1e-12);

  QuasiRandom qr(4, 5);
  for (int i = 0; i < 100; ++i) {
    const auto s = qr.next();
    const Vec xs = vec2(kTwoPi * s[0], kTwoPi * s[1]);
    const double mag = 0.5 + 2.0 * s[3];
    const Vec vs = vec2(mag * std::cos(kTwoPi * s[2]), mag * std::sin(kTwoPi * s[2]));
    const Vec Gs = spray_coefficients<double>(kConformal, xs, vs);
    const Vec Gos = oracle::conformal_G({1, 0}, 0.2, 0.0, xs, vs);
    CHECK((Gs - Gos).norm() <= 1e-10 * std::max(1.0, Gos.norm()));
  }
}

TEST_CASE("spray homogeneity of degree 2") {
  const Vec x = vec2(1.0, 2.0);
  const Vec v = vec2(0.3, -0.9);
  const Vec G1 = spray_coefficients<double>(kConformal, x, v);
  const Vec G2 = spray_coefficients<double>(kConformal, x, Vec(2.0 * v));
  CHECK((G2 - 4.0 * G1).norm() <= 1e-10);
}

TEST_CASE("Euler-Lagrange residual of integrated conformal geodesics") {
  IntegratorConfig cfg;
  const SpherePoint p = ray2(0.7, 0.2, 0.9);
  const double dt = 1e-3;
  for (double t : {0.3, 0.9, 1.7}) {
    const RealState before = integrate_geodesic(kConformal, p, t - dt, cfg);
    const RealState now = integrate_geodesic(kConformal, p, t, cfg);
    const RealState after = integrate_geodesic(kConformal, p, t + dt, cfg);
    CHECK(oracle::euler_lagrange_residual(kConformal, before, now, after, dt) <= 1e-6);
  }
}

TEST_CASE("near-degenerate tensor is reported") {
  Vec b(2);
  b << 1.0 - 1e-13, 0.0;
  const FinslerMetric m = FinslerMetric::randers_drift(b);
  RealState s;
  s.x = vec2(0, 0);
  s.v = vec2(-1.0, 0.0);  // opposite the drift: F/|v| = 1e-13, cond ~ 1e13
  CHECK_THROWS_AS(spray_rhs<double>(m, s), Error);
  try {
    spray_rhs<double>(m, s);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularTensor);
  }
}

TEST_CASE("Reeb field closed-form values") {
  const SMVector rE = reeb_field(kEuclid, ray2(0, 0, 0));
  CHECK(rE.dx[0] == doctest::Approx(1.0));
  CHECK(rE.dx[1] == doctest::Approx(0.0));
  CHECK(rE.dray == doctest::Approx(0.0));

  const SMVector rR = reeb_field(kRanders, ray2(0, 0, 0));
  CHECK(rR.dx[0] == doctest::Approx(1.0 / 1.3));
  CHECK(rR.dx[1] == doctest::Approx(0.0));
  CHECK(rR.dray == doctest::Approx(0.0));
}

TEST_CASE("Reeb flow projects onto spray geodesics (cross-oracle)") {
  IntegratorConfig cfg;
  QuasiRandom qr(3, 31);
  for (const FinslerMetric& m : {kEuclid, kRanders, kConformal}) {
    for (int i = 0; i < 5; ++i) {
      const auto s = qr.next();
      const SpherePoint p = ray2(kTwoPi * s[0], kTwoPi * s[1], kTwoPi * s[2]);
      for (double t : {0.25, 1.0}) {
        const SpherePoint reeb = integrate_reeb(m, p, t, cfg);
        const RealState spray = integrate_geodesic(m, p, t, cfg);
        const SpherePoint proj = SpherePoint::from_direction(spray.x, spray.v);
        CHECK(wrap_delta(reeb.base[0] - proj.base[0]) <= 1e-8);
        CHECK(wrap_delta(reeb.base[1] - proj.base[1]) <= 1e-8);
        CHECK(std::abs(wrap_delta(reeb.ray - proj.ray)) <= 1e-8);
      }
    }
  }
}

TEST_CASE("straight-line geodesics of flat families") {
  IntegratorConfig cfg;
  const RealState a = integrate_geodesic(kEuclid, ray2(0, 0, 0), 0.7, cfg);
  CHECK(a.x[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(a.x[1] == doctest::Approx(0.0));
  CHECK(a.v[0] == doctest::Approx(1.0));

  // F-speed of the Randers ray (1,0) is 1.3, so t = 1.3 travels distance 1
  const RealState b = integrate_geodesic(kRanders, ray2(0, 0, 0), 1.3, cfg);
  CHECK(b.x[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.x[1] == doctest::Approx(0.0));
}

TEST_CASE("F is a first integral to 1e-9 over t in [0, 10]") {
  IntegratorConfig cfg;  // adaptive, tolerances 1e-10
  for (const FinslerMetric& m : {kEuclid, kRanders, kConformal}) {
    const SpherePoint p = ray2(0.3, 1.9, 2.2);
    for (double t : {0.5, 2.0, 5.0, 10.0}) {
      const RealState s = integrate_geodesic(m, p, t, cfg);
      CHECK(std::abs(eval_F<double>(m, s.x, s.v) - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("rational-slope flat geodesics close up on the torus") {
  IntegratorConfig cfg;
  const SpherePoint p = ray2(0.25, 0.5, std::atan2(3.0, 4.0));
  const double period = kTwoPi * 5.0;  // direction (4,3)/5 returns after 5 wraps
  const RealState s = integrate_geodesic(kEuclid, p, period, cfg);
  CHECK(std::abs(wrap_delta(s.x[0] - p.base[0])) <= 1e-9);
  CHECK(std::abs(wrap_delta(s.x[1] - p.base[1])) <= 1e-9);
}

TEST_CASE("ray reversal reverses reversible geodesics, not Randers") {
  IntegratorConfig cfg;
  const double t = 0.8;
  const SpherePoint p = ray2(1.0, 0.4, 0.7);
  SpherePoint pr = p;
  pr.ray = p.ray + kTwoPi / 2.0;
  pr.canonicalize();

  const RealState fwd = integrate_geodesic(kConformal, p, -t, cfg);
  const RealState rev = integrate_geodesic(kConformal, pr, t, cfg);
  CHECK(std::abs(wrap_delta(fwd.x[0] - rev.x[0])) <= 1e-9);
  CHECK(std::abs(wrap_delta(fwd.x[1] - rev.x[1])) <= 1e-9);

  // Non-reversible: the Randers rays (1,0) and (-1,0) travel at different
  // F-speeds, so the same comparison visibly fails.
  const RealState f2 = integrate_geodesic(kRanders, ray2(0, 0, 0), -t, cfg);
  const RealState r2 = integrate_geodesic(kRanders, ray2(0, 0, kTwoPi / 2.0), t, cfg);
  CHECK(std::abs(wrap_delta(f2.x[0] - r2.x[0])) > 1e-3);
}

TEST_CASE("dim-1 circle geodesics conserve F") {
  FinslerMetric m;
  m.family = MetricFamily::riemannian_conformal;
  m.dim = 1;
  m.conformal.push_back(ConformalMode{{1, 0}, 0.2, 0.0});
  m.validate();

  IntegratorConfig cfg;
  SpherePoint p;
  p.base = Vec(1);
  p.base << 0.3;
  p.ray = 1.0;
  const RealState s = integrate_geodesic(m, p, 4.0, cfg);
  CHECK(std::abs(eval_F<double>(m, s.x, s.v) - 1.0) <= 1e-9);

  const SMVector reeb = reeb_field(m, p);
  const double lam = 1.0 + 0.2 * std::cos(0.3);
  CHECK(reeb.dx[0] == doctest::Approx(1.0 / lam));
}
