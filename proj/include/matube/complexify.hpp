#pragma once

#include "matube/geodesic.hpp"

namespace matube {

// Everything needed to continue geodesics into the half-strip
// H_R = { s + i r : 0 <= r < R } over the complexified torus.
struct TubeContext {
  FinslerMetric metric;
  double R = 0.5;
  IntegratorConfig cfg;     // cfg.step drives the fixed-step complex legs
  double s_max = 20.0;      // per-evaluation cap on |Re z|

  // The vertical leg always uses this many RK4 steps (step size r / n, never
  // larger than cfg.step); a step count that jumped with r would make the
  // tube map discontinuous at the integrator-error level.
  int vertical_steps() const {
    return std::max(1, static_cast<int>(std::ceil(R / cfg.step)));
  }
};

// Continue a complex phase-space state along the straight segment
// zeta -> zeta + dir * length in complex time (|dir| = 1), nsteps RK4 steps.
ComplexState continue_state(const FinslerMetric& m, const ComplexState& s,
                            Complex dir, double length, int nsteps);

// gamma^C_p(s + i r): complexified unit-speed geodesic, integrated along the
// L-path 0 -> s -> s + i r. Restriction to r = 0 is the real geodesic.
ComplexState complex_geodesic(const TubeContext& tube, const SpherePoint& p,
                              double s, double r);

// Tube map mu(p, r) = gamma^C_p(i r); the identity on SM at r = 0.
ComplexState mu_state(const TubeContext& tube, const SpherePoint& p, double r);
CVec mu_point(const TubeContext& tube, const SpherePoint& p, double r);

// Central-difference Cauchy-Riemann defect |d gamma/ds + i d gamma/dr| of the
// position at s + i r; O(h^2) plus integrator tolerance for analytic metrics.
double cauchy_riemann_residual(const TubeContext& tube, const SpherePoint& p,
                               double s, double r, double h);

// Distance between the L-path (0 -> s -> s+ir) and reverse-L-path
// (0 -> ir -> s+ir) continuations, over position and velocity.
double path_independence_check(const TubeContext& tube, const SpherePoint& p,
                               double s, double r);

}  // namespace matube
