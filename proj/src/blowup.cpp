#include "matube/blowup.hpp"

#include <cmath>

#include "matube/extrapolate.hpp"

namespace matube {

BlowupChart make_chart(const SpherePoint& center) {
  BlowupChart chart;
  chart.center = center;
  const int n = center.dim();
  chart.rot = Mat(n, n);
  if (n == 1) {
    chart.rot(0, 0) = (center.ray < 0) ? -1.0 : 1.0;
  } else {
    const double c = std::cos(center.ray), s = std::sin(center.ray);
    chart.rot(0, 0) = s;
    chart.rot(0, 1) = -c;
    chart.rot(1, 0) = c;
    chart.rot(1, 1) = s;
  }
  return chart;
}

BlowupCoords to_blowup(const BlowupChart& chart, const Vec& y) {
  const int n = chart.dim();
  const Vec w = chart.rot * y;
  BlowupCoords out;
  out.p = Vec(n - 1);
  if (!(w[n - 1] > 0))
    fail(ErrorCode::OutOfChart, "direction on the wrong side of the chart center");
  for (int a = 0; a < n - 1; ++a) {
    out.p[a] = w[a] / w[n - 1];
    if (std::abs(out.p[a]) > 1.0 + 1e-12)
      fail(ErrorCode::OutOfChart, "direction outside the pi/4 chart cone");
  }
  out.r = w[n - 1];
  return out;
}

Vec from_blowup(const BlowupChart& chart, const Vec& p, double r) {
  const int n = chart.dim();
  if (!(r >= 0)) fail(ErrorCode::SpecInvalid, "blowup radius must be >= 0");
  Vec w(n);
  for (int a = 0; a < n - 1; ++a) w[a] = r * p[a];
  w[n - 1] = r;
  return chart.rot.transpose() * w;
}

LiftedCurve lift_curve(const std::vector<double>& t, const std::vector<CVec>& z) {
  if (t.size() != z.size() || t.size() < 2)
    fail(ErrorCode::SpecInvalid, "lift_curve needs >= 2 matching samples");
  if (t[0] != 0.0) fail(ErrorCode::SpecInvalid, "lift_curve expects t[0] = 0");
  const int n = static_cast<int>(z[0].size());

  Vec x0(n), im0(n);
  for (int j = 0; j < n; ++j) {
    x0[j] = z[0][j].real();
    im0[j] = z[0][j].imag();
  }
  if (im0.norm() > 1e-10)
    fail(ErrorCode::SpecInvalid, "lift_curve expects c(0) on the zero set");

  // Normal part of c'(0) = imaginary part of the one-sided difference.
  Vec normal(n);
  for (int j = 0; j < n; ++j) normal[j] = (z[1][j].imag() - z[0][j].imag()) / (t[1] - t[0]);
  if (normal.norm() < 1e-10)
    fail(ErrorCode::TangentToM, "curve is tangent to the zero set at t = 0");

  LiftedCurve out;
  out.boundary = SpherePoint::from_direction(x0, normal);
  out.chart = make_chart(out.boundary);
  for (std::size_t i = 0; i < t.size(); ++i) {
    Vec xr(n), yi(n);
    for (int j = 0; j < n; ++j) {
      xr[j] = z[i][j].real();
      yi[j] = z[i][j].imag();
    }
    out.t.push_back(t[i]);
    out.x.push_back(xr);
    if (i == 0) {
      out.p.push_back(Vec::Zero(n - 1));
      out.r.push_back(0.0);
    } else {
      const BlowupCoords bc = to_blowup(out.chart, yi);
      out.p.push_back(bc.p);
      out.r.push_back(bc.r);
    }
  }
  return out;
}

namespace {

SpherePoint offset_ray(const SpherePoint& p, const SMVector& V, double eps) {
  SpherePoint q = p;
  q.base += eps * V.dx;
  q.ray += eps * V.dray;  // no canonicalization: keep the path continuous
  return q;
}

}  // namespace

double theta_S(const MAModel& model, const SpherePoint& p, const SMVector& V,
               const std::vector<double>& r_seq) {
  if (r_seq.size() < 2) fail(ErrorCode::SpecInvalid, "theta_S needs >= 2 extrapolation nodes");
  const TubeContext tube = model.tube();
  const double eps = model.fd.gradient_step;
  const int n = model.metric.dim;

  std::vector<double> values;
  for (double r : r_seq) {
    const CVec at = mu_point(tube, p, r);
    const CVec zp = mu_point(tube, offset_ray(p, V, eps), r);
    const CVec zm = mu_point(tube, offset_ray(p, V, -eps), r);
    RealTangent W(2 * n);
    for (int j = 0; j < n; ++j) {
      const Complex w = (zp[j] - zm[j]) / (2.0 * eps);
      W[j] = w.real();
      W[n + j] = w.imag();
    }
    values.push_back(theta_of(model, at, W, model.fd.gradient_step));
  }
  return extrapolate_to_zero(r_seq, values);
}

namespace {

// SM frame adapted to the chart at p: d/ds (base motion along the ray),
// d/dx^alpha (base motion along the chart axes), and the ray direction.
std::vector<SMVector> chart_frame(const BlowupChart& chart) {
  const int n = chart.dim();
  std::vector<SMVector> frame;
  SMVector Vs;
  Vs.dx = chart.center.unit_dir();
  Vs.dray = 0.0;
  frame.push_back(Vs);
  for (int a = 0; a < n - 1; ++a) {
    SMVector Vx;
    Vx.dx = chart.rot.row(a).transpose();
    Vx.dray = 0.0;
    frame.push_back(Vx);
  }
  if (n == 2) {
    SMVector Vp;
    Vp.dx = Vec::Zero(n);
    Vp.dray = 1.0;
    frame.push_back(Vp);
  }
  return frame;
}

}  // namespace

double hilbert_contact_residual(const MAModel& model, const SpherePoint& p,
                                const std::vector<double>& r_seq) {
  const BlowupChart chart = make_chart(p);
  const std::vector<SMVector> frame = chart_frame(chart);
  const Vec h = hilbert_coefficients<double>(model.metric, p.base, p.unit_dir());
  double worst = 0.0;
  for (const SMVector& V : frame) {
    const double tF = h.dot(V.dx);  // theta_F has no ray component
    const double tS = theta_S(model, p, V, r_seq);
    worst = std::max(worst, std::abs(tF + tS));
  }
  return worst;
}

ProfileCheck profile_formula_check(const MAModel& model, const SpherePoint& p,
                                   const std::vector<double>& r_seq) {
  const int n = model.metric.dim;
  const BlowupChart chart = make_chart(p);
  const double hp = 1e-3;

  // U(p, r) = u(x0 + i * from_blowup(p, r)) / r and its p-derivatives.
  const auto U_at = [&](const Vec& pc, double r) {
    const Vec y = from_blowup(chart, pc, r);
    CVec z(n);
    for (int j = 0; j < n; ++j) z[j] = Complex(p.base[j], y[j]);
    return eval_u(model, z) / r;
  };

  std::vector<double> U_vals;
  std::vector<std::vector<double>> Up_vals(n - 1);
  for (double r : r_seq) {
    U_vals.push_back(U_at(Vec::Zero(n - 1), r));
    for (int a = 0; a < n - 1; ++a) {
      Vec pp = Vec::Zero(n - 1), pm = Vec::Zero(n - 1);
      pp[a] = hp;
      pm[a] = -hp;
      Up_vals[a].push_back((U_at(pp, r) - U_at(pm, r)) / (2.0 * hp));
    }
  }
  const double U0 = extrapolate_to_zero(r_seq, U_vals);
  std::vector<double> Up(n - 1);
  for (int a = 0; a < n - 1; ++a) Up[a] = extrapolate_to_zero(r_seq, Up_vals[a]);

  // Predicted components against directly evaluated theta_S. At the chart
  // center p = 0:  ds -> -U0,  dx^alpha -> -dU/dp^alpha,  ray -> 0.
  const std::vector<SMVector> frame = chart_frame(chart);
  ProfileCheck out;
  out.U0 = U0;
  std::vector<double> predicted;
  predicted.push_back(-U0);
  for (int a = 0; a < n - 1; ++a) predicted.push_back(-Up[a]);
  if (n == 2) predicted.push_back(0.0);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double actual = theta_S(model, p, frame[i], r_seq);
    out.residuals.push_back(std::abs(actual - predicted[i]));
    out.max_residual = std::max(out.max_residual, out.residuals.back());
  }
  return out;
}

double contact_volume(const MAModel& model, const SpherePoint& p,
                      const std::vector<double>& r_seq) {
  if (model.metric.dim != 2)
    fail(ErrorCode::SpecInvalid, "contact_volume needs the 3-dimensional SM (n = 2)");
  const double hc = model.fd.hessian_step;

  SMVector e[3];
  e[0].dx = Vec(2);
  e[0].dx << 1, 0;
  e[1].dx = Vec(2);
  e[1].dx << 0, 1;
  e[2].dx = Vec::Zero(2);
  e[2].dray = 1.0;

  const auto theta_at = [&](const SpherePoint& q, int b) {
    return theta_S(model, q, e[b], r_seq);
  };
  double theta0[3];
  for (int b = 0; b < 3; ++b) theta0[b] = theta_at(p, b);

  // d theta(e_a, e_b) = D_a theta_b - D_b theta_a on commuting frame fields.
  const auto D = [&](int a, int b) {
    const SpherePoint qp = offset_ray(p, e[a], hc);
    const SpherePoint qm = offset_ray(p, e[a], -hc);
    return (theta_at(qp, b) - theta_at(qm, b)) / (2.0 * hc);
  };
  const double d12 = D(0, 1) - D(1, 0);
  const double d13 = D(0, 2) - D(2, 0);
  const double d23 = D(1, 2) - D(2, 1);

  const double vol = theta0[0] * d23 - theta0[1] * d13 + theta0[2] * d12;
  if (std::abs(vol) < 1e-8)
    fail(ErrorCode::DegenerateContact,
         "theta_S ^ d theta_S vanishes at the sampled ray (convexity failure)");
  return vol;
}

}  // namespace matube
