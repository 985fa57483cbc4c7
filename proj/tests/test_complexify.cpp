#include <doctest.h>

#include "matube/complexify.hpp"
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

TubeContext make_tube(const FinslerMetric& m, double R) {
  TubeContext t;
  t.metric = m;
  t.R = R;
  t.cfg.method = IntegratorConfig::Method::fixed_rk4;
  return t;
}

const FinslerMetric kEuclid = FinslerMetric::euclidean(2);
const FinslerMetric kRanders = FinslerMetric::randers_drift(vec2(0.3, 0.0));
const FinslerMetric kConformal = FinslerMetric::conformal_mode(2, {1, 0}, 0.2, 0.0);

double cdist(const CVec& a, const CVec& b) {
  double d = 0.0;
  for (int j = 0; j < a.size(); ++j) d += std::norm(a[j] - b[j]);
  return std::sqrt(d);
}

}  // namespace

TEST_CASE("flat continuations match the straight-line oracle") {
  const TubeContext tE = make_tube(kEuclid, 0.5);
  const SpherePoint p = ray2(0, 0, 0);
  const ComplexState a = complex_geodesic(tE, p, 0.2, 0.3);
  const CVec oa = oracle::flat_leaf(vec2(0, 0), vec2(1, 0), Vec(), Complex(0.2, 0.3));
  CHECK(cdist(a.x, oa) <= 1e-13);
  CHECK(std::abs(a.x[0] - Complex(0.2, 0.3)) <= 1e-13);
  CHECK(std::abs(a.x[1]) <= 1e-13);

  // Randers at z = 1.3i lands on (i, 0): unit F-speed is 1/1.3 along (1, 0)
  const TubeContext tR = make_tube(kRanders, 2.0);
  const ComplexState b = complex_geodesic(tR, p, 0.0, 1.3);
  CHECK(std::abs(b.x[0] - Complex(0.0, 1.0)) <= 1e-12);
  CHECK(std::abs(b.x[1]) <= 1e-13);
}

TEST_CASE("restriction to the real axis is the real geodesic") {
  const TubeContext t = make_tube(kConformal, 0.5);
  IntegratorConfig adaptive;
  const SpherePoint p = ray2(0.4, 1.2, 0.8);
  for (double s : {0.3, 1.1, 2.7}) {
    const ComplexState c = complex_geodesic(t, p, s, 0.0);
    const RealState g = integrate_geodesic(kConformal, p, s, adaptive);
    double d = 0.0;
    for (int j = 0; j < 2; ++j) {
      d = std::max(d, std::abs(c.x[j].real() - g.x[j]));
      d = std::max(d, std::abs(c.x[j].imag()));
    }
    CHECK(d <= 1e-10);
  }
}

TEST_CASE("tube map mu: boundary identity and transversality") {
  const TubeContext t = make_tube(kEuclid, 0.5);
  const SpherePoint p = ray2(1.1, 2.2, 0.6);
  const CVec z0 = mu_point(t, p, 0.0);
  CHECK(std::abs(z0[0].imag()) == 0.0);
  CHECK(std::abs(z0[0].real() - 1.1) <= 1e-15);

  // mu(((0,0), pi/2), 0.4) = (0, 0.4i)
  const CVec z = mu_point(t, ray2(0, 0, kTwoPi / 4.0), 0.4);
  CHECK(std::abs(z[0]) <= 1e-13);
  CHECK(std::abs(z[1] - Complex(0, 0.4)) <= 1e-13);

  // d/dr Im(mu) at r = 0 is along J of the unit ray (here: the ray itself in
  // the y-components), nonzero
  const double h = 1e-4;
  const TubeContext tc = make_tube(kConformal, 0.5);
  const SpherePoint q = ray2(0.3, 0.9, 1.9);
  const CVec zp = mu_point(tc, q, h);
  Vec dy(2);
  for (int j = 0; j < 2; ++j) dy[j] = zp[j].imag() / h;
  const Vec dir = q.unit_dir();
  const double F = eval_F<double>(kConformal, q.base, dir);
  CHECK((dy - dir / F).norm() <= 1e-6);
  CHECK(dy.norm() > 0.1);
}

TEST_CASE("Cauchy-Riemann residuals") {
  const TubeContext tE = make_tube(kEuclid, 0.5);
  CHECK(cauchy_riemann_residual(tE, ray2(0.2, 0.9, 1.3), 0.1, 0.2, 1e-3) <= 1e-9);

  const TubeContext tC = make_tube(kConformal, 0.5);
  const double r1 = cauchy_riemann_residual(tC, ray2(0, 0, 0.7), 0.3, 0.2, 1e-3);
  CHECK(r1 <= 1e-5);

  // second-order differencing: halving h divides the residual by about 4
  const double big = cauchy_riemann_residual(tC, ray2(0, 0, 0.7), 0.3, 0.2, 8e-3);
  const double small = cauchy_riemann_residual(tC, ray2(0, 0, 0.7), 0.3, 0.2, 4e-3);
  CHECK(small <= big / 2.5);
}

TEST_CASE("path independence of the two L-paths") {
  const TubeContext tR = make_tube(kRanders, 0.5);
  CHECK(path_independence_check(tR, ray2(0, 0, 1.0), 0.4, 0.3) <= 1e-12);

  const TubeContext tC = make_tube(kConformal, 0.5);
  CHECK(path_independence_check(tC, ray2(0.5, 0.1, 2.0), 0.5, 0.3) <= 1e-8);
  CHECK(path_independence_check(tC, ray2(0.5, 0.1, 2.0), 0.0, 0.3) == 0.0);
}

TEST_CASE("group property along the real axis") {
  const TubeContext t = make_tube(kConformal, 0.5);
  IntegratorConfig adaptive;
  const SpherePoint p = ray2(0.6, 0.2, 2.4);
  const double s1 = 0.7, s2 = 0.9;
  const ComplexState whole = complex_geodesic(t, p, s1 + s2, 0.0);
  const RealState mid = integrate_geodesic(kConformal, p, s1, adaptive);
  const RealState end = integrate_state(kConformal, mid, s2, adaptive);
  CHECK(std::abs(whole.x[0].real() - end.x[0]) <= 1e-9);
  CHECK(std::abs(whole.x[1].real() - end.x[1]) <= 1e-9);
  CHECK(std::abs(whole.v[0].real() - end.v[0]) <= 1e-9);
}

TEST_CASE("half-strip bounds are enforced") {
  const TubeContext t = make_tube(kEuclid, 0.5);
  CHECK_THROWS_AS(complex_geodesic(t, ray2(0, 0, 0), 0.0, 0.5), Error);
  try {
    complex_geodesic(t, ray2(0, 0, 0), 0.0, 0.6);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TubeExceeded);
  }
  CHECK_THROWS_AS(complex_geodesic(t, ray2(0, 0, 0), 25.0, 0.1), Error);
}

TEST_CASE("branch-cut proximity aborts the continuation loudly") {
  FinslerMetric rigged = FinslerMetric::conformal_mode(2, {1, 0}, 0.2, 0.0);
  rigged.branch_margin = 0.8;  // swallows the unit indicatrix where lambda > 1.12
  const TubeContext t = make_tube(rigged, 0.5);
  CHECK_THROWS_AS(complex_geodesic(t, ray2(0, 0, 0.3), 0.0, 0.2), Error);
  try {
    complex_geodesic(t, ray2(0, 0, 0.3), 0.0, 0.2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BranchCutProximity);
  }
}

TEST_CASE("injectivity and immersion witnesses at desk scale") {
  const TubeContext t = make_tube(kConformal, 0.4);
  QuasiRandom qr(4, 41);
  std::vector<CVec> images;
  std::vector<std::array<double, 4>> params;
  for (int i = 0; i < 60; ++i) {
    const auto s = qr.next();
    const SpherePoint p = ray2(kTwoPi * s[0], kTwoPi * s[1], kTwoPi * s[2]);
    const double r = 0.05 + (0.95 * t.R - 0.05) * s[3];
    images.push_back(mu_point(t, p, r));
    params.push_back({p.base[0], p.base[1], p.ray, r});
  }
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j) {
      double dp = 0.0;
      dp = std::max(dp, std::abs(wrap_delta(params[i][0] - params[j][0])));
      dp = std::max(dp, std::abs(wrap_delta(params[i][1] - params[j][1])));
      dp = std::max(dp, std::abs(wrap_delta(params[i][2] - params[j][2])));
      dp = std::max(dp, std::abs(params[i][3] - params[j][3]));
      if (dp > 0.05) CHECK(tube_distance(images[i], images[j]) > 1e-6);
    }
}
