#include "matube/geodesic.hpp"

#include <cmath>

namespace matube {

RealState unit_initial_state(const FinslerMetric& m, const SpherePoint& p) {
  RealState s;
  s.x = p.base;
  const Vec dir = p.unit_dir();
  const double F = eval_F<double>(m, p.base, dir);
  s.v = dir / F;
  return s;
}

RealState integrate_state(const FinslerMetric& m, const RealState& s, double t,
                          const IntegratorConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(t)) fail(ErrorCode::SpecInvalid, "integration time must be finite");
  if (t == 0.0) return s;

  auto rhs = [&m](double, const PhaseVec<double>& y) {
    return spray_rhs<double>(m, RealState::unflatten(y)).flatten();
  };

  PhaseVec<double> y = s.flatten();
  if (cfg.method == IntegratorConfig::Method::adaptive) {
    y = dp45(rhs, y, 0.0, t, cfg.abs_tol, cfg.rel_tol);
  } else {
    const int nsteps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / cfg.step)));
    y = rk4_fixed<double>(rhs, y, 0.0, t, nsteps);
  }
  return RealState::unflatten(y);
}

RealState integrate_geodesic(const FinslerMetric& m, const SpherePoint& p, double t,
                             const IntegratorConfig& cfg) {
  return integrate_state(m, unit_initial_state(m, p), t, cfg);
}

SMVector reeb_field(const FinslerMetric& m, const SpherePoint& p) {
  const int n = m.dim;
  const Vec dir = p.unit_dir();
  const MetricJet<double> jet = metric_jet<double>(m, p.base, dir);

  SMVector out;
  out.dx = Vec::Zero(n);
  out.dray = 0.0;

  if (n == 1) {
    // SM is one-dimensional; d theta_F vanishes and theta_F(X) = 1 alone
    // determines the Reeb field.
    if (std::abs(jet.F_v[0]) < 1e-12)
      fail(ErrorCode::DegenerateContact, "Hilbert coefficient vanishes on SM");
    out.dx[0] = 1.0 / jet.F_v[0];
    return out;
  }

  // SM basis (d/dx1, d/dx2, d/dphi); theta_F = h_1 dx1 + h_2 dx2 with
  // h_j = dF/dv^j (x, v(phi)).  d theta_F components:
  //   w12 = d h2/dx1 - d h1/dx2,  w13 = -d h1/dphi,  w23 = -d h2/dphi,
  // where d h_j/dphi = F_vv . v'(phi).
  Vec dphi_dir(2);
  dphi_dir[0] = -dir[1];
  dphi_dir[1] = dir[0];
  const Vec dh_dphi = jet.F_vv * dphi_dir;
  const double w12 = jet.F_xv(0, 1) - jet.F_xv(1, 0);
  const double w13 = -dh_dphi[0];
  const double w23 = -dh_dphi[1];

  // Kernel of the rank-2 two-form, then normalize with theta_F.
  Eigen::Vector3d w(w23, -w13, w12);
  const double scale = w.norm();
  const double pairing = jet.F_v[0] * w[0] + jet.F_v[1] * w[1];
  if (scale < 1e-12 || std::abs(pairing) < 1e-12 * std::max(1.0, scale))
    fail(ErrorCode::DegenerateContact,
         "contact form degenerate at the requested ray (convexity failure?)");
  w /= pairing;
  out.dx[0] = w[0];
  out.dx[1] = w[1];
  out.dray = w[2];
  return out;
}

SpherePoint integrate_reeb(const FinslerMetric& m, const SpherePoint& p, double t,
                           const IntegratorConfig& cfg) {
  cfg.validate();
  const int n = m.dim;
  if (n == 1 || t == 0.0) {
    if (t == 0.0) return p;
    // One-dimensional Reeb flow: dx/dt = 1 / h(x).
    auto rhs = [&](double, const PhaseVec<double>& y) {
      SpherePoint q = p;
      q.base[0] = y[0];
      const SMVector r = reeb_field(m, q);
      PhaseVec<double> dy(1);
      dy[0] = r.dx[0];
      return dy;
    };
    PhaseVec<double> y(1);
    y[0] = p.base[0];
    y = dp45(rhs, y, 0.0, t, cfg.abs_tol, cfg.rel_tol);
    SpherePoint q = p;
    q.base[0] = y[0];
    q.canonicalize();
    return q;
  }

  auto rhs = [&](double, const PhaseVec<double>& y) {
    SpherePoint q;
    q.base = Vec(2);
    q.base[0] = y[0];
    q.base[1] = y[1];
    q.ray = y[2];
    const SMVector r = reeb_field(m, q);
    PhaseVec<double> dy(3);
    dy[0] = r.dx[0];
    dy[1] = r.dx[1];
    dy[2] = r.dray;
    return dy;
  };
  PhaseVec<double> y(3);
  y[0] = p.base[0];
  y[1] = p.base[1];
  y[2] = p.ray;
  y = dp45(rhs, y, 0.0, t, cfg.abs_tol, cfg.rel_tol);
  SpherePoint q;
  q.base = Vec(2);
  q.base[0] = y[0];
  q.base[1] = y[1];
  q.ray = y[2];
  q.canonicalize();
  return q;
}

}  // namespace matube
