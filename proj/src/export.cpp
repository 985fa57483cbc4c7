#include "matube/export.hpp"

#include <cmath>

#include "matube/report.hpp"

namespace matube {

void trace_leaf_csv(const MAModel& model, const SpherePoint& p, int Ns, int Nr,
                    double s_max, double r_max, std::ostream& out) {
  if (Ns < 1 || Nr < 1) fail(ErrorCode::SpecInvalid, "trace grid must be >= 1x1");
  const int n = model.metric.dim;
  const TubeContext tube = model.tube();

  out << "s,r";
  for (int j = 1; j <= n; ++j) out << ",re_z" << j;
  for (int j = 1; j <= n; ++j) out << ",im_z" << j;
  out << ",u,ma_residual,status\n";

  const double ma_floor = std::max(0.02, 5.0 * model.fd.hessian_step);
  for (int is = 0; is < Ns; ++is) {
    const double s = Ns == 1 ? 0.0 : s_max * is / (Ns - 1);
    for (int ir = 0; ir < Nr; ++ir) {
      const double r = Nr == 1 ? 0.0 : r_max * ir / (Nr - 1);
      out << fmt17(s) << "," << fmt17(r);
      if (r >= model.R) {
        for (int j = 0; j < 2 * n; ++j) out << "," << fmt17(0.0);
        out << "," << fmt17(0.0) << "," << fmt17(0.0) << ",tube_exceeded\n";
        continue;
      }
      CVec z;
      std::string status = "ok";
      double u = 0.0, ma = 0.0;
      try {
        z = complex_geodesic(tube, p, s, r).x;
        u = eval_u(model, z);
        if (r == 0.0) {
          status = "boundary";
        } else if (r < ma_floor) {
          status = "near_boundary";
        } else {
          ma = ma_residual(model, z, model.fd.hessian_step).normalized_det;
        }
      } catch (const Error& e) {
        status = error_code_name(e.code());
      }
      for (int j = 0; j < n; ++j) out << "," << fmt17(z.size() ? z[j].real() : 0.0);
      for (int j = 0; j < n; ++j) out << "," << fmt17(z.size() ? z[j].imag() : 0.0);
      out << "," << fmt17(u) << "," << fmt17(ma) << "," << status << "\n";
    }
  }
}

void grid_u_csv(const MAModel& model, const Vec& re_part, const Vec& y_lo,
                const Vec& y_hi, const std::vector<int>& res, std::ostream& out) {
  const int n = model.metric.dim;
  if (static_cast<int>(res.size()) != n || re_part.size() != n || y_lo.size() != n ||
      y_hi.size() != n)
    fail(ErrorCode::SpecInvalid, "grid window/resolution must match dim");
  for (int r : res)
    if (r < 1) fail(ErrorCode::SpecInvalid, "grid resolution must be >= 1");

  for (int j = 1; j <= n; ++j) out << (j > 1 ? "," : "") << "x" << j;
  for (int j = 1; j <= n; ++j) out << ",y" << j;
  out << ",u,min_eig_hc_u2,status\n";

  const double eig_floor = 5.0 * model.fd.hessian_step;
  const int total = res[0] * (n == 2 ? res[1] : 1);
  for (int idx = 0; idx < total; ++idx) {
    Vec y(n);
    int i0 = idx, i1 = 0;
    if (n == 2) {
      i1 = idx % res[1];
      i0 = idx / res[1];
    }
    y[0] = res[0] == 1 ? y_lo[0] : y_lo[0] + (y_hi[0] - y_lo[0]) * i0 / (res[0] - 1);
    if (n == 2)
      y[1] = res[1] == 1 ? y_lo[1] : y_lo[1] + (y_hi[1] - y_lo[1]) * i1 / (res[1] - 1);

    CVec z(n);
    for (int j = 0; j < n; ++j) z[j] = Complex(re_part[j], y[j]);
    std::string status = "ok";
    double u = 0.0, eig = 0.0;
    try {
      u = eval_u(model, z);
      if (u == 0.0) {
        status = "boundary";
      } else if (u < eig_floor) {
        status = "near_boundary";
      } else {
        eig = psh_min_eig(model, z, model.fd.hessian_step);
      }
    } catch (const Error& e) {
      status = error_code_name(e.code());
    }
    for (int j = 0; j < n; ++j) out << (j > 0 ? "," : "") << fmt17(re_part[j]);
    for (int j = 0; j < n; ++j) out << "," << fmt17(y[j]);
    out << "," << fmt17(u) << "," << fmt17(eig) << "," << status << "\n";
  }
}

}  // namespace matube
