#include "matube/complexify.hpp"

#include <cmath>

namespace matube {

ComplexState continue_state(const FinslerMetric& m, const ComplexState& s,
                            Complex dir, double length, int nsteps) {
  if (length == 0.0) return s;
  auto rhs = [&m, dir](double, const PhaseVec<Complex>& y) {
    const ComplexState st = ComplexState::unflatten(y);
    const ComplexState d = spray_rhs<Complex>(m, st);
    return PhaseVec<Complex>(dir * d.flatten());
  };
  PhaseVec<Complex> y = s.flatten();
  y = rk4_fixed<Complex>(rhs, y, 0.0, length, nsteps);
  return ComplexState::unflatten(y);
}

static void check_strip(const TubeContext& tube, double s, double r) {
  if (r < 0.0 || r >= tube.R)
    fail(ErrorCode::TubeExceeded, "imaginary time " + std::to_string(r) +
                                      " outside [0, R) with R = " + std::to_string(tube.R));
  if (std::abs(s) > tube.s_max)
    fail(ErrorCode::TubeExceeded, "real time exceeds the configured cap s_max");
}

ComplexState complex_geodesic(const TubeContext& tube, const SpherePoint& p,
                              double s, double r) {
  check_strip(tube, s, r);
  ComplexState st = to_complex(unit_initial_state(tube.metric, p));
  if (s != 0.0) {
    const int n_real = std::max(1, static_cast<int>(std::ceil(std::abs(s) / tube.cfg.step)));
    st = continue_state(tube.metric, st, Complex(s > 0 ? 1.0 : -1.0, 0.0), std::abs(s), n_real);
  }
  if (r != 0.0)
    st = continue_state(tube.metric, st, Complex(0.0, 1.0), r, tube.vertical_steps());
  return st;
}

ComplexState mu_state(const TubeContext& tube, const SpherePoint& p, double r) {
  return complex_geodesic(tube, p, 0.0, r);
}

CVec mu_point(const TubeContext& tube, const SpherePoint& p, double r) {
  return mu_state(tube, p, r).x;
}

double cauchy_riemann_residual(const TubeContext& tube, const SpherePoint& p,
                               double s, double r, double h) {
  if (!(h > 0)) fail(ErrorCode::SpecInvalid, "step h must be > 0");
  if (r - h < 0.0 || r + h >= tube.R)
    fail(ErrorCode::TubeExceeded, "h-neighborhood of z leaves the half-strip");
  const CVec xp = complex_geodesic(tube, p, s + h, r).x;
  const CVec xm = complex_geodesic(tube, p, s - h, r).x;
  const CVec yp = complex_geodesic(tube, p, s, r + h).x;
  const CVec ym = complex_geodesic(tube, p, s, r - h).x;
  const CVec ds = (xp - xm) / (2.0 * h);
  const CVec dr = (yp - ym) / (2.0 * h);
  return (ds + Complex(0.0, 1.0) * dr).norm();
}

double path_independence_check(const TubeContext& tube, const SpherePoint& p,
                               double s, double r) {
  check_strip(tube, s, r);
  const ComplexState a = complex_geodesic(tube, p, s, r);

  // Reverse-L path: vertical first, then horizontal.
  ComplexState st = to_complex(unit_initial_state(tube.metric, p));
  if (r != 0.0)
    st = continue_state(tube.metric, st, Complex(0.0, 1.0), r, tube.vertical_steps());
  if (s != 0.0) {
    const int n_real = std::max(1, static_cast<int>(std::ceil(std::abs(s) / tube.cfg.step)));
    st = continue_state(tube.metric, st, Complex(s > 0 ? 1.0 : -1.0, 0.0), std::abs(s), n_real);
  }

  double d2 = 0.0;
  for (int j = 0; j < a.dim(); ++j) {
    d2 += std::norm(a.x[j] - st.x[j]) + std::norm(a.v[j] - st.v[j]);
  }
  return std::sqrt(d2);
}

}  // namespace matube
