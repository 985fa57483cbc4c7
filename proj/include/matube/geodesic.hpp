#pragma once

#include "matube/integrate.hpp"
#include "matube/metric.hpp"
#include "matube/types.hpp"

namespace matube {

// Geodesic spray coefficients: x'' = -2 G(x, v), with
//   G^i = (1/4) g^{il} ( d2(F^2)/dx^k dv^l * v^k - d(F^2)/dx^l ).
// G is homogeneous of degree 2 in v.
template <class S>
VecX<S> spray_coefficients(const FinslerMetric& m, const VecX<S>& x, const VecX<S>& v) {
  const int n = m.dim;
  const MetricJet<S> jet = metric_jet<S>(m, x, v);

  MatX<S> g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g(i, j) = jet.F * jet.F_vv(i, j) + jet.F_v[i] * jet.F_v[j];

  VecX<S> rhs(n);
  for (int l = 0; l < n; ++l) {
    S mixed{};
    for (int k = 0; k < n; ++k)
      mixed += 2.0 * (jet.F_x[k] * jet.F_v[l] + jet.F * jet.F_xv(k, l)) * v[k];
    rhs[l] = 0.25 * (mixed - 2.0 * jet.F * jet.F_x[l]);
  }

  VecX<S> G(n);
  if (n == 1) {
    if (std::abs(g(0, 0)) < 1e-12)
      fail(ErrorCode::SingularTensor, "fundamental tensor numerically singular");
    G[0] = rhs[0] / g(0, 0);
  } else {
    const S det = g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0);
    double frob2 = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) frob2 += std::norm(std::complex<double>(g(i, j)));
    if (!(std::abs(det) * 1e12 > frob2))
      fail(ErrorCode::SingularTensor,
           "fundamental tensor condition estimate exceeds 1e12");
    G[0] = (g(1, 1) * rhs[0] - g(0, 1) * rhs[1]) / det;
    G[1] = (g(0, 0) * rhs[1] - g(1, 0) * rhs[0]) / det;
  }
  return G;
}

// d/dt (x, v) = (v, -2 G(x, v)).
template <class S>
GeodesicState<S> spray_rhs(const FinslerMetric& m, const GeodesicState<S>& s) {
  GeodesicState<S> out;
  out.x = s.v;
  out.v = -2.0 * spray_coefficients<S>(m, s.x, s.v);
  return out;
}

// Initial state of the unit-speed geodesic through p: x = base,
// v = ray direction scaled so that F(x, v) = 1.
RealState unit_initial_state(const FinslerMetric& m, const SpherePoint& p);

// Advance a real phase-space state by time t with the configured integrator.
RealState integrate_state(const FinslerMetric& m, const RealState& s, double t,
                          const IntegratorConfig& cfg);

// gamma(t) with gamma(0) = base(p), gamma'(0) the unit-F vector in ray(p).
RealState integrate_geodesic(const FinslerMetric& m, const SpherePoint& p, double t,
                             const IntegratorConfig& cfg);

// Reeb vector field of the Hilbert form theta_F on SM: the unique solution of
// theta_F(X) = 1, X . d theta_F = 0, assembled from the analytic x- and
// ray-derivatives of the Hilbert coefficients.
SMVector reeb_field(const FinslerMetric& m, const SpherePoint& p);

// Integrate the Reeb flow on SM for time t (adaptive integrator).
SpherePoint integrate_reeb(const FinslerMetric& m, const SpherePoint& p, double t,
                           const IntegratorConfig& cfg);

}  // namespace matube
