#include <doctest.h>

#include <nlohmann/json.hpp>

#include "matube/metric.hpp"
#include "matube/sampling.hpp"
#include "oracles.hpp"

using namespace matube;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

const FinslerMetric kEuclid = FinslerMetric::euclidean(2);
const FinslerMetric kRanders = FinslerMetric::randers_drift(vec2(0.3, 0.0));
const FinslerMetric kConformal =
    FinslerMetric::conformal_mode(2, {1, 0}, 0.2, 0.0);  // lambda = 1 + 0.2 cos(x1)

std::vector<FinslerMetric> shipped() {
  return {kEuclid, kRanders, kConformal, FinslerMetric::minkowski_drift(vec2(0.3, 0.0))};
}

}  // namespace

TEST_CASE("eval_F closed-form values") {
  CHECK(eval_F<double>(kEuclid, vec2(0, 0), vec2(1, 0)) == doctest::Approx(1.0));
  CHECK(eval_F<double>(kRanders, vec2(0, 0), vec2(1, 0)) == doctest::Approx(1.3));
  // lambda(0) * |(0,2)| = 1.2 * 2
  CHECK(eval_F<double>(kConformal, vec2(0, 0), vec2(0, 2)) == doctest::Approx(2.4));
}

TEST_CASE("zero vector and scale errors") {
  CHECK_THROWS_AS(eval_F<double>(kEuclid, vec2(0, 0), vec2(0, 0)), Error);
  try {
    eval_F<double>(kEuclid, vec2(0, 0), vec2(0, 0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroVector);
  }
  CHECK_THROWS_AS(check_homogeneity(kEuclid, vec2(0, 0), vec2(1, 1), -2.0), Error);
  try {
    check_homogeneity(kEuclid, vec2(0, 0), vec2(1, 1), 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonpositiveScale);
  }
}

TEST_CASE("hilbert coefficients") {
  const Vec h1 = hilbert_coefficients<double>(kEuclid, vec2(0, 0), vec2(1, 0));
  CHECK(h1[0] == doctest::Approx(1.0));
  CHECK(h1[1] == doctest::Approx(0.0));

  // hand-differentiated |v| + b.v at (0,1)
  const Vec h2 = hilbert_coefficients<double>(kRanders, vec2(0, 0), vec2(0, 1));
  CHECK(h2[0] == doctest::Approx(0.3));
  CHECK(h2[1] == doctest::Approx(1.0));

  const Vec h3 = hilbert_coefficients<double>(kEuclid, vec2(0, 0), vec2(3, 4));
  CHECK(h3[0] == doctest::Approx(0.6));
  CHECK(h3[1] == doctest::Approx(0.8));
}

TEST_CASE("homogeneity residuals vanish") {
  CHECK(check_homogeneity(kEuclid, vec2(0, 0), vec2(1, 1), 2.0) <= 1e-12);
  CHECK(check_homogeneity(kRanders, vec2(0, 0), vec2(0, 1), 0.5) <= 1e-12);
  CHECK(check_homogeneity(kConformal, vec2(0.3, 0.7), vec2(2, 0), 3.0) <= 1e-12);
}

TEST_CASE("Euler identity and degree-0 homogeneity of the Hilbert form") {
  for (const FinslerMetric& m : shipped()) {
    QuasiRandom qr(4, 7);
    for (int i = 0; i < 1000; ++i) {
      const auto s = qr.next();
      const Vec x = vec2(kTwoPi * s[0], kTwoPi * s[1]);
      const double ang = kTwoPi * s[2];
      const double mag = 0.25 + 4.0 * s[3];
      const Vec v = vec2(mag * std::cos(ang), mag * std::sin(ang));
      const double F = eval_F<double>(m, x, v);
      const Vec h = hilbert_coefficients<double>(m, x, v);
      CHECK(std::abs(h.dot(v) - F) <= 1e-12 * std::max(1.0, F));
      for (double t : {0.5, 2.0, 10.0}) {
        const Vec ht = hilbert_coefficients<double>(m, x, Vec(t * v));
        CHECK((ht - h).norm() <= 1e-12);
      }
    }
  }
}

TEST_CASE("fundamental tensor: identity, symbolic Randers, positivity") {
  const Mat gE = fundamental_tensor<double>(kEuclid, vec2(0, 0), vec2(0.7, -0.1));
  CHECK((gE - Mat::Identity(2, 2)).norm() <= 1e-12);

  const Vec b = vec2(0.3, 0.0);
  const Mat gR = fundamental_tensor<double>(kRanders, vec2(0, 0), vec2(1, 0));
  const Mat gOracle = oracle::flat_g(b, vec2(1, 0));
  CHECK((gR - gOracle).norm() <= 1e-12);
  CHECK(gR.determinant() > 0.0);

  QuasiRandom qr(4, 11);
  for (int i = 0; i < 100; ++i) {
    const auto s = qr.next();
    const Vec x = vec2(kTwoPi * s[0], kTwoPi * s[1]);
    const Vec v = vec2(std::cos(kTwoPi * s[2]), std::sin(kTwoPi * s[2]));
    const Mat g = fundamental_tensor<double>(kRanders, x, v);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es{Eigen::Matrix2d(g)};
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("fundamental tensor matches finite differences of F^2/2") {
  QuasiRandom qr(4, 13);
  const double h = 1e-4;
  for (const FinslerMetric& m : shipped()) {
    for (int i = 0; i < 50; ++i) {
      const auto s = qr.next();
      const Vec x = vec2(kTwoPi * s[0], kTwoPi * s[1]);
      const double ang = kTwoPi * s[2];
      const Vec v = vec2(std::cos(ang), std::sin(ang));
      const auto halfE = [&](const Vec& vv) {
        const double F = eval_F<double>(m, x, vv);
        return 0.5 * F * F;
      };
      Mat fd(2, 2);
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
          Vec vpp = v, vpm = v, vmp = v, vmm = v;
          vpp[a] += h;
          vpp[c] += h;
          vpm[a] += h;
          vpm[c] -= h;
          vmp[a] -= h;
          vmp[c] += h;
          vmm[a] -= h;
          vmm[c] -= h;
          fd(a, c) = (halfE(vpp) - halfE(vpm) - halfE(vmp) + halfE(vmm)) / (4 * h * h);
        }
      const Mat g = fundamental_tensor<double>(m, x, v);
      CHECK((g - fd).norm() / g.norm() <= 1e-6);
    }
  }
}

TEST_CASE("g positive definite at 1000 quasi-random samples per shipped metric") {
  for (const FinslerMetric& m : shipped()) {
    QuasiRandom qr(4, 17);
    double min_eig = 1e300;
    for (int i = 0; i < 1000; ++i) {
      const auto s = qr.next();
      const Vec x = vec2(kTwoPi * s[0], kTwoPi * s[1]);
      const double mag = 0.5 + 2.0 * s[3];
      const Vec v = vec2(mag * std::cos(kTwoPi * s[2]), mag * std::sin(kTwoPi * s[2]));
      const Mat g = fundamental_tensor<double>(m, x, v);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es{Eigen::Matrix2d(g)};
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    CHECK(min_eig > 0.0);
  }
}

TEST_CASE("complex evaluation: principal branch and real restriction") {
  CVec x0 = CVec::Zero(2);

  CVec v(2);
  v << Complex(1, 0), Complex(0, 0);
  CHECK(std::abs(eval_F<Complex>(kEuclid, x0, v) - Complex(1, 0)) <= 1e-15);

  v << Complex(0.6, 0.8), Complex(0, 0);
  const Complex F = eval_F<Complex>(kEuclid, x0, v);
  CHECK(std::abs(F - Complex(0.6, 0.8)) <= 1e-14);

  // lambda at complex x: cos(i pi) = cosh(pi)
  CVec xc(2);
  xc << Complex(0, kTwoPi / 2.0), Complex(0, 0);
  CVec e1(2);
  e1 << Complex(1, 0), Complex(0, 0);
  const double expected = 1.0 + 0.2 * std::cosh(kTwoPi / 2.0);
  CHECK(std::abs(eval_F<Complex>(kConformal, xc, e1) - Complex(expected, 0)) <= 1e-12);

  // real restriction agrees with the real path
  QuasiRandom qr(3, 23);
  for (int i = 0; i < 200; ++i) {
    const auto s = qr.next();
    const Vec xr = vec2(kTwoPi * s[0], kTwoPi * s[1]);
    const Vec vr = vec2(std::cos(kTwoPi * s[2]), std::sin(kTwoPi * s[2]));
    const double Fr = eval_F<double>(kConformal, xr, vr);
    const Complex Fc =
        eval_F<Complex>(kConformal, CVec(xr.cast<Complex>()), CVec(vr.cast<Complex>()));
    CHECK(std::abs(Fc - Complex(Fr, 0)) <= 1e-15 * std::max(1.0, Fr));
  }
}

TEST_CASE("complex jets keep the Euler identity off the real locus") {
  QuasiRandom qr(6, 29);
  for (int i = 0; i < 100; ++i) {
    const auto s = qr.next();
    CVec x(2), v(2);
    x << Complex(kTwoPi * s[0], 0.2 * s[1]), Complex(kTwoPi * s[2], 0);
    v << Complex(0.9 + 0.4 * s[3], 0.2 * s[4]), Complex(0.3, 0.15 * s[5]);
    for (const FinslerMetric& m : shipped()) {
      const MetricJet<Complex> jet = metric_jet<Complex>(m, x, v);
      Complex pair{};
      for (int j = 0; j < 2; ++j) pair += jet.F_v[j] * v[j];
      CHECK(std::abs(pair - jet.F) <= 1e-12 * std::max(1.0, std::abs(jet.F)));
      // fundamental tensor from the same jet stays finite and symmetric
      const CMat g = fundamental_tensor<Complex>(m, x, v);
      CHECK(std::abs(g(0, 1) - g(1, 0)) <= 1e-13);
    }
  }
}

TEST_CASE("branch cut proximity is loud") {
  CVec x0 = CVec::Zero(2);
  CVec v(2);
  v << Complex(1e-4, 0), Complex(0, 0);  // |sum v^2| = 1e-8 < margin
  CHECK_THROWS_AS(eval_F<Complex>(kEuclid, x0, v), Error);
  try {
    eval_F<Complex>(kEuclid, x0, v);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BranchCutProximity);
  }
  // near the null cone in a genuinely complex direction: (1, i) has sum v^2 = 0
  v << Complex(1, 0), Complex(0, 1.0 - 1e-9);
  CHECK_THROWS_AS(eval_F<Complex>(kEuclid, x0, v), Error);
}

TEST_CASE("metric spec JSON: schema, validation, round trip") {
  const auto j = nlohmann::json::parse(R"({
    "family": "randers", "dim": 2, "b": [0.3, 0.0]
  })");
  const FinslerMetric m = FinslerMetric::from_json(j);
  CHECK(m.family == MetricFamily::randers);
  CHECK(m.b[0] == doctest::Approx(0.3));

  nlohmann::ordered_json out;
  m.to_json(out);
  const FinslerMetric m2 = FinslerMetric::from_json(out);
  CHECK(m2.b[0] == m.b[0]);
  CHECK(m2.dim == m.dim);

  const auto bad_b = nlohmann::json::parse(R"({"family":"randers","dim":2,"b":[1.2,0]})");
  CHECK_THROWS_AS(FinslerMetric::from_json(bad_b), Error);
  try {
    FinslerMetric::from_json(bad_b);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SpecInvalid);
  }

  const auto bad_key =
      nlohmann::json::parse(R"({"family":"randers","dim":2,"b":[0.3,0],"junk":1})");
  CHECK_THROWS_AS(FinslerMetric::from_json(bad_key), Error);

  // conformal reserve 1 - sum(|a|+|b|) must stay positive
  const auto bad_conf = nlohmann::json::parse(
      R"({"family":"riemannian_conformal","dim":2,"conformal":[[1,0,0.7,0],[0,1,0.4,0]]})");
  CHECK_THROWS_AS(FinslerMetric::from_json(bad_conf), Error);

  const auto conf = nlohmann::json::parse(
      R"({"family":"riemannian_conformal","dim":2,"conformal":[[1,0,0.2,0.0]]})");
  const FinslerMetric mc = FinslerMetric::from_json(conf);
  CHECK(mc.conformal.size() == 1);
  CHECK(eval_F<double>(mc, vec2(0, 0), vec2(0, 2)) == doctest::Approx(2.4));

  // dim-1 spec uses [k, a, b] rows
  const auto one = nlohmann::json::parse(
      R"({"family":"riemannian_conformal","dim":1,"conformal":[[1,0.2,0.0]]})");
  const FinslerMetric m1 = FinslerMetric::from_json(one);
  Vec x1(1), v1(1);
  x1 << 0.0;
  v1 << 2.0;
  CHECK(eval_F<double>(m1, x1, v1) == doctest::Approx(2.4));
}
