#pragma once

#include <vector>

#include "matube/model.hpp"

namespace matube {

// Local homogeneous coordinates centered at an oriented normal ray: the chart
// rotation takes the ray direction to the last axis, and the imaginary part
// y decomposes as y = rot^T (r p^1, ..., r p^{n-1}, r).
struct BlowupChart {
  SpherePoint center;
  Mat rot;  // orthogonal, rot * unit_dir(center) = e_n

  int dim() const { return center.dim(); }
};

BlowupChart make_chart(const SpherePoint& center);

struct BlowupCoords {
  Vec p;  // size n-1
  double r = 0.0;
};

// Mutually inverse where defined; to_blowup rejects directions outside the
// pi/4 cone around the chart center.
BlowupCoords to_blowup(const BlowupChart& chart, const Vec& y);
Vec from_blowup(const BlowupChart& chart, const Vec& p, double r);

// Unique lift of a curve c(t) with c(0) in M, transverse to M, c(t) off M
// for t > 0: boundary ray from the normal part of c'(0), interior samples
// through blowup coordinates.
struct LiftedCurve {
  SpherePoint boundary;
  BlowupChart chart;
  std::vector<double> t;
  std::vector<Vec> x;  // real parts
  std::vector<Vec> p;  // blowup direction offsets (size n-1)
  std::vector<double> r;
};

LiftedCurve lift_curve(const std::vector<double>& t, const std::vector<CVec>& z);

// Boundary contact form theta_S applied to an SM tangent vector V: evaluate
// theta at mu(p, r) on the trivially transported push-forward of V, for each
// r in r_seq, and extrapolate to r = 0.
double theta_S(const MAModel& model, const SpherePoint& p, const SMVector& V,
               const std::vector<double>& r_seq = {0.02, 0.01});

// Hilbert-form comparison theta_F(V) + theta_S(V) at a ray, componentwise on
// the SM frame (d/ds, d/dx^alpha, ray direction); returns max abs residual.
double hilbert_contact_residual(const MAModel& model, const SpherePoint& p,
                                const std::vector<double>& r_seq = {0.02, 0.01});

// Profile-formula check: assemble
//   theta_S = -(U - p dU/dp) ds - (dU/dp) dx^alpha
// from U = u/r sampled in blowup coordinates and compare against theta_S
// evaluated directly; returns the per-component residuals.
struct ProfileCheck {
  double U0 = 0.0;          // extrapolated profile at the center ray
  double max_residual = 0.0;
  std::vector<double> residuals;  // ds, dx^alpha..., ray components
};

ProfileCheck profile_formula_check(const MAModel& model, const SpherePoint& p,
                                   const std::vector<double>& r_seq = {0.02, 0.01});

// theta_S ^ d theta_S evaluated on the SM coordinate frame (n = 2 only);
// nonvanishing iff the metric is strongly convex at the sampled ray.
double contact_volume(const MAModel& model, const SpherePoint& p,
                      const std::vector<double>& r_seq = {0.02, 0.01});

}  // namespace matube
