#pragma once

#include <algorithm>
#include <cmath>

#include "matube/types.hpp"

namespace matube {

// Classical RK4 with a prescribed number of equal steps over [t0, t1].
// Rhs signature: PhaseVec<S> f(double t, const PhaseVec<S>& y).
// State updates use compensated summation: downstream code takes second
// differences of quantities computed from these trajectories, and plain
// accumulation jitter (~sqrt(nsteps) * eps) would dominate those stencils.
template <class S, class Rhs>
PhaseVec<S> rk4_fixed(Rhs&& f, PhaseVec<S> y, double t0, double t1, int nsteps) {
  const double h = (t1 - t0) / nsteps;
  double t = t0;
  PhaseVec<S> comp = PhaseVec<S>::Zero(y.size());
  for (int i = 0; i < nsteps; ++i) {
    const PhaseVec<S> k1 = f(t, y);
    const PhaseVec<S> k2 = f(t + 0.5 * h, PhaseVec<S>(y + (0.5 * h) * k1));
    const PhaseVec<S> k3 = f(t + 0.5 * h, PhaseVec<S>(y + (0.5 * h) * k2));
    const PhaseVec<S> k4 = f(t + h, PhaseVec<S>(y + h * k3));
    const PhaseVec<S> incr = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    for (int c = 0; c < y.size(); ++c) {
      const S dy = incr[c] - comp[c];
      const S yn = y[c] + dy;
      comp[c] = (yn - y[c]) - dy;
      y[c] = yn;
    }
    t = t0 + (i + 1) * h;
  }
  return y;
}

// Dormand-Prince 5(4) embedded pair with PI step control.
template <class Rhs>
PhaseVec<double> dp45(Rhs&& f, PhaseVec<double> y, double t0, double t1,
                      double abs_tol, double rel_tol) {
  if (t1 == t0) return y;
  const double dir = (t1 > t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  double t = t0;
  double h = dir * std::min(0.01, span);
  double prev_err = 1.0;

  PhaseVec<double> k1 = f(t, y);
  while (dir * (t1 - t) > 0) {
    if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
      fail(ErrorCode::StepUnderflow, "adaptive step fell below 1e-14");

    const PhaseVec<double> k2 = f(t + h / 5.0, PhaseVec<double>(y + h * (1.0 / 5.0) * k1));
    const PhaseVec<double> k3 =
        f(t + 3.0 * h / 10.0, PhaseVec<double>(y + h * ((3.0 / 40.0) * k1 + (9.0 / 40.0) * k2)));
    const PhaseVec<double> k4 = f(
        t + 4.0 * h / 5.0,
        PhaseVec<double>(y + h * ((44.0 / 45.0) * k1 - (56.0 / 15.0) * k2 + (32.0 / 9.0) * k3)));
    const PhaseVec<double> k5 =
        f(t + 8.0 * h / 9.0,
          PhaseVec<double>(y + h * ((19372.0 / 6561.0) * k1 - (25360.0 / 2187.0) * k2 +
                                    (64448.0 / 6561.0) * k3 - (212.0 / 729.0) * k4)));
    const PhaseVec<double> k6 =
        f(t + h, PhaseVec<double>(y + h * ((9017.0 / 3168.0) * k1 - (355.0 / 33.0) * k2 +
                                           (46732.0 / 5247.0) * k3 + (49.0 / 176.0) * k4 -
                                           (5103.0 / 18656.0) * k5)));
    const PhaseVec<double> y5 =
        y + h * ((35.0 / 384.0) * k1 + (500.0 / 1113.0) * k3 + (125.0 / 192.0) * k4 -
                 (2187.0 / 6784.0) * k5 + (11.0 / 84.0) * k6);
    const PhaseVec<double> k7 = f(t + h, y5);

    const PhaseVec<double> err_vec =
        h * ((71.0 / 57600.0) * k1 - (71.0 / 16695.0) * k3 + (71.0 / 1920.0) * k4 -
             (17253.0 / 339200.0) * k5 + (22.0 / 525.0) * k6 - (1.0 / 40.0) * k7);

    double err = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      const double sc = abs_tol + rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(err_vec[i]) / sc);
    }

    if (err <= 1.0) {
      t += h;
      y = y5;
      k1 = k7;  // FSAL
      const double grow =
          0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(prev_err, 0.4 / 5.0);
      h *= std::clamp(grow, 0.2, 5.0);
      prev_err = std::max(err, 1e-10);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
    }
  }
  return y;
}

}  // namespace matube
