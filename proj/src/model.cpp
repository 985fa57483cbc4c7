#include "matube/model.hpp"

#include <algorithm>
#include <cmath>

#include "matube/extrapolate.hpp"
#include "matube/sampling.hpp"

namespace matube {

namespace {

using VecQ = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;
using MatQ =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDim, 2 * kMaxDim>;

// mu(p, r) with the model's fixed vertical step count and no strip check;
// Newton iterates are allowed to roam slightly past R.
ComplexState mu_raw(const MAModel& model, const SpherePoint& p, double r) {
  ComplexState st = to_complex(unit_initial_state(model.metric, p));
  if (r != 0.0)
    st = continue_state(model.metric, st, Complex(0.0, 1.0), r,
                        model.tube().vertical_steps());
  return st;
}

// Newton problem mu(q) = zeta in chart coordinates.
// q layout: n = 2 -> (x1, x2, phi, r); n = 1 -> (x, r), ray sign fixed.
struct InvertProblem {
  const MAModel& model;
  CVec target;
  double sign1 = 1.0;

  int n() const { return model.metric.dim; }
  int unknowns() const { return 2 * n(); }

  TubeCoordinates unpack(const VecQ& q) const {
    TubeCoordinates tc;
    tc.p.base = Vec(n());
    if (n() == 1) {
      tc.p.base[0] = q[0];
      tc.p.ray = sign1;
      tc.r = q[1];
    } else {
      tc.p.base[0] = q[0];
      tc.p.base[1] = q[1];
      tc.p.ray = q[2];
      tc.r = q[3];
    }
    return tc;
  }

  VecQ pack(const TubeCoordinates& tc) const {
    VecQ q(unknowns());
    if (n() == 1) {
      q[0] = tc.p.base[0];
      q[1] = tc.r;
    } else {
      q[0] = tc.p.base[0];
      q[1] = tc.p.base[1];
      q[2] = tc.p.ray;
      q[3] = tc.r;
    }
    return q;
  }

  VecQ clamp(VecQ q) const {
    const int ri = unknowns() - 1;
    q[ri] = std::clamp(q[ri], 1e-12, 1.5 * model.R);
    return q;
  }

  VecQ residual(const VecQ& q) const {
    const TubeCoordinates tc = unpack(q);
    const CVec z = mu_raw(model, tc.p, tc.r).x;
    VecQ res(unknowns());
    for (int j = 0; j < n(); ++j) {
      res[j] = wrap_delta(z[j].real() - target[j].real());
      res[n() + j] = z[j].imag() - target[j].imag();
    }
    return res;
  }

  MatQ fd_jacobian(const VecQ& q, const VecQ& res0) const {
    const double delta = 1e-6;
    MatQ J(unknowns(), unknowns());
    for (int a = 0; a < unknowns(); ++a) {
      VecQ qa = q;
      qa[a] += delta;
      J.col(a) = (residual(clamp(qa)) - res0) / delta;
    }
    return J;
  }
};

TubeCoordinates newton_invert(const MAModel& model, const CVec& zeta,
                              InverterCache& cache) {
  const int n = model.metric.dim;
  double im2 = 0.0;
  for (int j = 0; j < n; ++j) im2 += zeta[j].imag() * zeta[j].imag();
  if (std::sqrt(im2) < 1e-14)
    fail(ErrorCode::OnSingularSet, "invert_mu called on the zero set of u");

  InvertProblem prob{model, zeta, 1.0};
  Vec y(n);
  for (int j = 0; j < n; ++j) y[j] = zeta[j].imag();
  if (n == 1) prob.sign1 = (y[0] < 0) ? -1.0 : 1.0;

  VecQ q;
  if (cache.guess) {
    q = prob.pack(*cache.guess);
  } else {
    TubeCoordinates g;
    g.p.base = Vec(n);
    for (int j = 0; j < n; ++j) g.p.base[j] = zeta[j].real();
    g.p.ray = (n == 1) ? prob.sign1 : std::atan2(y[1], y[0]);
    g.r = eval_F<double>(model.metric, g.p.base, y);
    q = prob.pack(g);
  }
  q = prob.clamp(q);

  VecQ res = prob.residual(q);
  double rn = res.norm();
  MatQ J;
  bool have_J = false;
  if (cache.jacobian && cache.guess) {
    J = *cache.jacobian;
    have_J = true;
  }

  const double tol = model.newton.tol;
  int since_refresh = 1000;
  if (have_J) since_refresh = 0;

  int iter = 0;
  while (rn > tol) {
    if (++iter > model.newton.max_iter)
      fail(ErrorCode::NewtonDiverged, "tube inversion exceeded max_iter");
    if (!have_J || since_refresh >= 4) {
      J = prob.fd_jacobian(q, res);
      have_J = true;
      since_refresh = 0;
    }
    Eigen::FullPivLU<MatQ> lu(J);
    if (!lu.isInvertible()) {
      if (since_refresh > 0) {
        since_refresh = 1000;  // force refresh and retry
        continue;
      }
      fail(ErrorCode::NewtonDiverged, "singular Jacobian in tube inversion");
    }
    const VecQ d = lu.solve(-res);
    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 9; ++ls) {
      const VecQ q2 = prob.clamp(q + t * d);
      const VecQ res2 = prob.residual(q2);
      const double rn2 = res2.norm();
      if (rn2 < rn) {
        q = q2;
        res = res2;
        rn = rn2;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (since_refresh > 0) {
        since_refresh = 1000;
        continue;
      }
      fail(ErrorCode::NewtonDiverged, "line search stalled in tube inversion");
    }
    ++since_refresh;
  }

  // Polish until the residual stalls at the roundoff floor, refreshing the
  // Jacobian once if a stale one contracts too slowly. Tolerance-level jitter
  // in eval_u would otherwise dominate second differences taken over it.
  const auto polish = [&](int max_steps) {
    Eigen::FullPivLU<MatQ> lu(J);
    if (!lu.isInvertible()) return;
    for (int k = 0; k < max_steps && rn > 0.0; ++k) {
      const VecQ q2 = prob.clamp(q + VecQ(lu.solve(-res)));
      const VecQ res2 = prob.residual(q2);
      if (!(res2.norm() < rn)) break;
      q = q2;
      res = res2;
      rn = res2.norm();
    }
  };
  if (have_J && rn > 0.0) {
    polish(6);
    if (rn > 1e-14) {
      J = prob.fd_jacobian(q, res);
      polish(3);
    }
  }

  if (!(rn <= tol)) fail(ErrorCode::NewtonDiverged, "tube inversion did not converge");

  TubeCoordinates out = prob.unpack(q);
  cache.guess = out;  // keep pre-canonical parameters for chained queries
  if (have_J) cache.jacobian = J;
  out.p.canonicalize();
  return out;
}

}  // namespace

TubeCoordinates invert_mu(const MAModel& model, const CVec& zeta) {
  InverterCache cache;
  return newton_invert(model, zeta, cache);
}

TubeCoordinates invert_mu_cached(const MAModel& model, const CVec& zeta,
                                 InverterCache& cache) {
  return newton_invert(model, zeta, cache);
}

double eval_u(const MAModel& model, const CVec& zeta) {
  InverterCache cache;
  return eval_u_cached(model, zeta, cache);
}

double eval_u_cached(const MAModel& model, const CVec& zeta, InverterCache& cache) {
  double im2 = 0.0;
  for (int j = 0; j < zeta.size(); ++j) im2 += zeta[j].imag() * zeta[j].imag();
  if (std::sqrt(im2) < 1e-14) return 0.0;  // u vanishes on M
  return newton_invert(model, zeta, cache).r;
}

// ---------------------------------------------------------------------------
// Model construction

namespace {

MatQ immersion_jacobian(const MAModel& model, const SpherePoint& p, double r,
                        double h) {
  const int n = model.metric.dim;
  const int m = 2 * n;
  InvertProblem prob{model, CVec::Zero(n), p.ray < 0 ? -1.0 : 1.0};
  TubeCoordinates tc{p, r};
  const VecQ q0 = prob.pack(tc);
  MatQ J(m, m);
  for (int a = 0; a < m; ++a) {
    VecQ qp = q0, qm = q0;
    qp[a] += h;
    qm[a] -= h;
    const CVec zp = mu_raw(model, prob.unpack(qp).p, prob.unpack(qp).r).x;
    const CVec zm = mu_raw(model, prob.unpack(qm).p, prob.unpack(qm).r).x;
    for (int j = 0; j < n; ++j) {
      J(j, a) = (zp[j].real() - zm[j].real()) / (2 * h);
      J(n + j, a) = (zp[j].imag() - zm[j].imag()) / (2 * h);
    }
  }
  return J;
}

bool pilot_diagnostics(MAModel& model, BuildDiagnostics& diag) {
  const int n = model.metric.dim;
  const int n_rays = 16;
  const double r_frac[] = {0.12, 0.35, 0.65, 0.9};

  QuasiRandom qr(n + 1, 20201u);
  std::vector<SpherePoint> rays;
  for (int i = 0; i < n_rays; ++i) {
    const auto u = qr.next();
    SpherePoint p;
    p.base = Vec(n);
    for (int j = 0; j < n; ++j) p.base[j] = kTwoPi * u[j];
    p.ray = (n == 1) ? (u[n] < 0.5 ? -1.0 : 1.0) : kTwoPi * u[n];
    p.canonicalize();
    rays.push_back(p);
  }

  struct Pilot {
    SpherePoint p;
    double r;
    CVec image;
  };
  std::vector<Pilot> pilots;
  for (const SpherePoint& p : rays)
    for (double f : r_frac) {
      const double r = f * model.R;
      pilots.push_back(Pilot{p, r, mu_raw(model, p, r).x});
    }
  diag.pilot_samples = static_cast<int>(pilots.size());

  // Immersion: smallest singular value of the full differential of mu.
  diag.min_immersion_sv = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pilots.size(); i += 7) {
    const MatQ J = immersion_jacobian(model, pilots[i].p, pilots[i].r, 1e-4);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    diag.min_immersion_sv =
        std::min(diag.min_immersion_sv, svd.singularValues().minCoeff());
  }
  if (!(diag.min_immersion_sv > 1e-3)) return false;

  // Injectivity at desk scale: distinct tube coordinates give images
  // separated by more than 1e-6 in chart distance.
  diag.min_pair_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pilots.size(); ++i)
    for (std::size_t j = i + 1; j < pilots.size(); ++j) {
      double dp = std::abs(pilots[i].r - pilots[j].r);
      for (int c = 0; c < n; ++c)
        dp = std::max(dp, std::abs(wrap_delta(pilots[i].p.base[c] - pilots[j].p.base[c])));
      dp = std::max(dp, (n == 1) ? std::abs(pilots[i].p.ray - pilots[j].p.ray)
                                 : std::abs(wrap_delta(pilots[i].p.ray - pilots[j].p.ray)));
      if (dp < 0.05) continue;
      const double sep = tube_distance(pilots[i].image, pilots[j].image);
      diag.min_pair_separation = std::min(diag.min_pair_separation, sep);
      if (!(sep > 1e-6)) return false;
    }

  // Inversion round trip on a pilot subset.
  diag.max_roundtrip_error = 0.0;
  for (std::size_t i = 0; i < pilots.size(); i += 9) {
    const TubeCoordinates tc = invert_mu(model, pilots[i].image);
    double err = std::abs(tc.r - pilots[i].r);
    for (int c = 0; c < n; ++c)
      err = std::max(err, std::abs(wrap_delta(tc.p.base[c] - pilots[i].p.base[c])));
    err = std::max(err, (n == 1) ? std::abs(tc.p.ray - pilots[i].p.ray)
                                 : std::abs(wrap_delta(tc.p.ray - pilots[i].p.ray)));
    diag.max_roundtrip_error = std::max(diag.max_roundtrip_error, err);
  }
  return diag.max_roundtrip_error < 1e-8;
}

}  // namespace

MAModel build_model(const FinslerMetric& metric, double requested_R,
                    const IntegratorConfig& cfg, const NewtonConfig& newton,
                    const FdConfig& fd) {
  metric.validate();
  cfg.validate();
  newton.validate();
  if (!(requested_R > 0)) fail(ErrorCode::SpecInvalid, "requested R must be > 0");

  constexpr double kMinR = 0.05;
  MAModel model;
  model.metric = metric;
  model.cfg = cfg;
  model.newton = newton;
  model.fd = fd;
  model.diag.requested_R = requested_R;

  double R = requested_R;
  while (true) {
    ++model.diag.attempts;
    model.R = R;
    bool ok = false;
    try {
      ok = pilot_diagnostics(model, model.diag);
    } catch (const Error&) {
      ok = false;  // branch-cut / divergence at this height: shrink and retry
    }
    if (ok) return model;
    R *= 0.5;
    if (R < kMinR)
      fail(ErrorCode::TubeConstructionFailed,
           "pilot diagnostics still failing at R_min = 0.05");
  }
}

// ---------------------------------------------------------------------------
// Finite-difference stencils over eval_u

namespace {

// Shared stencil of u values on the real-coordinate grid around zeta,
// supporting Hessians/gradients of u, u^2 and tau from one evaluation pass.
class TubeStencil {
 public:
  TubeStencil(const MAModel& model, const CVec& zeta, double h, bool richardson)
      : model_(model), zeta_(zeta), h_(h), rich_(richardson) {
    n_ = model.metric.dim;
    m_ = 2 * n_;
    InverterCache center_cache;
    u0_ = eval_u_cached(model, zeta, center_cache);
    if (!(u0_ > 4.0 * h))
      fail(ErrorCode::OnSingularSet,
           "Hessian stencil too close to the zero set; use boundary extrapolation");
    base_cache_ = center_cache;

    const int levels = rich_ ? 2 : 1;
    for (int L = 0; L < levels; ++L) {
      const double hl = h_ / (1 << L);
      axis_p_[L].resize(m_);
      axis_m_[L].resize(m_);
      for (int a = 0; a < m_; ++a) {
        axis_p_[L][a] = probe(unit(a, hl));
        axis_m_[L][a] = probe(unit(a, -hl));
      }
      const int n_pairs = m_ * (m_ - 1) / 2;
      cross_[L].assign(n_pairs, std::array<double, 4>{});
      int k = 0;
      for (int a = 0; a < m_; ++a)
        for (int b = a + 1; b < m_; ++b, ++k) {
          cross_[L][k][0] = probe(unit(a, hl) + unit(b, hl));
          cross_[L][k][1] = probe(unit(a, hl) + unit(b, -hl));
          cross_[L][k][2] = probe(unit(a, -hl) + unit(b, hl));
          cross_[L][k][3] = probe(unit(a, -hl) + unit(b, -hl));
        }
    }
  }

  double center_u() const { return u0_; }
  int dims() const { return m_; }
  const InverterCache& center_cache() const { return base_cache_; }

  template <class T>
  Eigen::MatrixXd real_hessian(T&& t) const {
    Eigen::MatrixXd H = level_hessian(0, t);
    if (rich_) {
      const Eigen::MatrixXd H2 = level_hessian(1, t);
      H = (4.0 * H2 - H) / 3.0;
    }
    return H;
  }

  template <class T>
  RealTangent gradient(T&& t) const {
    RealTangent g = level_gradient(0, t);
    if (rich_) {
      const RealTangent g2 = level_gradient(1, t);
      g = (4.0 * g2 - g) / 3.0;
    }
    return g;
  }

 private:
  RealTangent unit(int a, double s) const {
    RealTangent d = RealTangent::Zero(m_);
    d[a] = s;
    return d;
  }

  double probe(const RealTangent& offset) {
    CVec z = zeta_;
    for (int j = 0; j < n_; ++j) z[j] += Complex(offset[j], offset[n_ + j]);
    InverterCache cache = base_cache_;
    return eval_u_cached(model_, z, cache);
  }

  template <class T>
  Eigen::MatrixXd level_hessian(int L, T&& t) const {
    const double hl = h_ / (1 << L);
    Eigen::MatrixXd H(m_, m_);
    const double t0 = t(u0_);
    for (int a = 0; a < m_; ++a)
      H(a, a) = (t(axis_p_[L][a]) - 2.0 * t0 + t(axis_m_[L][a])) / (hl * hl);
    int k = 0;
    for (int a = 0; a < m_; ++a)
      for (int b = a + 1; b < m_; ++b, ++k) {
        const auto& c = cross_[L][k];
        const double v = (t(c[0]) - t(c[1]) - t(c[2]) + t(c[3])) / (4.0 * hl * hl);
        H(a, b) = v;
        H(b, a) = v;
      }
    return H;
  }

  template <class T>
  RealTangent level_gradient(int L, T&& t) const {
    const double hl = h_ / (1 << L);
    RealTangent g(m_);
    for (int a = 0; a < m_; ++a)
      g[a] = (t(axis_p_[L][a]) - t(axis_m_[L][a])) / (2.0 * hl);
    return g;
  }

  const MAModel& model_;
  CVec zeta_;
  double h_;
  bool rich_;
  int n_ = 0, m_ = 0;
  double u0_ = 0.0;
  InverterCache base_cache_;
  std::array<std::vector<double>, 2> axis_p_, axis_m_;
  std::array<std::vector<std::array<double, 4>>, 2> cross_;
};

// 4 d2f/dz_j dz~k = (d_xj d_xk + d_yj d_yk) f + i (d_xj d_yk - d_yj d_xk) f.
CMat complex_from_real(const Eigen::MatrixXd& H, int n, double* defect) {
  CMat Hc(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      Hc(j, k) = 0.25 * Complex(H(j, k) + H(n + j, n + k), H(j, n + k) - H(n + j, k));
  double d = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) d = std::max(d, std::abs(Hc(j, k) - std::conj(Hc(k, j))));
  if (defect) *defect = d;
  CMat sym = 0.5 * (Hc + CMat(Hc.adjoint()));
  return sym;
}

Vec hermitian_eigenvalues(const CMat& H) {
  const Eigen::MatrixXcd Hd(H);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hd);
  Vec e(H.rows());
  for (int i = 0; i < H.rows(); ++i) e[i] = es.eigenvalues()[i];
  return e;
}

}  // namespace

CMat complex_hessian(const MAModel& model, FieldTag tag, const CVec& zeta, double h) {
  TubeStencil st(model, zeta, h, model.fd.richardson);
  auto transform = [tag](double u) {
    switch (tag) {
      case FieldTag::u: return u;
      case FieldTag::u_squared: return u * u;
      case FieldTag::tau: return 0.5 * u * u;
    }
    return u;
  };
  return complex_from_real(st.real_hessian(transform), model.metric.dim, nullptr);
}

TubeHessians tube_hessians(const MAModel& model, const CVec& zeta, double h) {
  TubeStencil st(model, zeta, h, model.fd.richardson);
  TubeHessians out;
  out.u = st.center_u();
  double d1 = 0.0, d2 = 0.0;
  out.H_u = complex_from_real(st.real_hessian([](double u) { return u; }),
                              model.metric.dim, &d1);
  out.H_u2 = complex_from_real(st.real_hessian([](double u) { return u * u; }),
                               model.metric.dim, &d2);
  out.hermitian_defect = std::max(d1, d2);
  return out;
}

MaResidual ma_residual(const MAModel& model, const CVec& zeta, double h) {
  TubeStencil st(model, zeta, h, model.fd.richardson);
  const CMat H = complex_from_real(st.real_hessian([](double u) { return u; }),
                                   model.metric.dim, nullptr);
  MaResidual out;
  out.u = st.center_u();
  out.eigenvalues = hermitian_eigenvalues(H);
  const int n = model.metric.dim;
  if (n == 1) {
    // (dd^c u)^1 = 0 is harmonicity; normalize against the slope 1/(4u) the
    // nonzero eigenvalue would have in the flat model.
    out.normalized_det = std::abs(out.eigenvalues[0]) * 4.0 * out.u;
    out.second_smallest_eig = std::numeric_limits<double>::quiet_NaN();
  } else {
    const double op =
        std::max(std::abs(out.eigenvalues[0]), std::abs(out.eigenvalues[n - 1]));
    double det = 1.0;
    for (int i = 0; i < n; ++i) det *= out.eigenvalues[i];
    out.normalized_det = std::abs(det) / std::pow(op, n);
    out.second_smallest_eig = out.eigenvalues[1];
  }
  return out;
}

double psh_min_eig(const MAModel& model, const CVec& zeta, double h) {
  TubeStencil st(model, zeta, h, model.fd.richardson);
  const CMat H = complex_from_real(st.real_hessian([](double u) { return u * u; }),
                                   model.metric.dim, nullptr);
  return hermitian_eigenvalues(H).minCoeff();
}

namespace {

Mat ray_rotation(const SpherePoint& p) {
  const int n = p.dim();
  Mat Q(n, n);
  if (n == 1) {
    Q(0, 0) = (p.ray < 0) ? -1.0 : 1.0;
  } else {
    const double c = std::cos(p.ray), s = std::sin(p.ray);
    Q(0, 0) = s;
    Q(0, 1) = -c;
    Q(1, 0) = c;
    Q(1, 1) = s;
  }
  if (std::abs(std::abs(Q.determinant()) - 1.0) > 1e-9)
    fail(ErrorCode::FrameMismatch, "adapted-frame rotation is singular");
  return Q;
}

}  // namespace

BoundaryHessian boundary_hessian_check(const MAModel& model, const SpherePoint& p,
                                       double r1, double r2) {
  if (!(r1 > r2 && r2 > 0))
    fail(ErrorCode::SpecInvalid, "boundary comparison needs r1 > r2 > 0");
  const TubeContext tube = model.tube();
  const CVec z1 = mu_point(tube, p, r1);
  const CVec z2 = mu_point(tube, p, r2);
  const CMat H1 = complex_hessian(model, FieldTag::u_squared, z1, model.fd.hessian_step);
  const CMat H2 = complex_hessian(model, FieldTag::u_squared, z2, model.fd.hessian_step);

  BoundaryHessian out;
  // Linear-in-r extrapolation to the boundary.
  out.extrapolated = (r1 * H2 - r2 * H1) / (r1 - r2);
  out.reference =
      0.5 * fundamental_tensor<double>(model.metric, p.base, p.unit_dir());

  const Mat Q = ray_rotation(p);
  const CMat Ha = Q.cast<Complex>() * out.extrapolated * Q.transpose().cast<Complex>();
  const Mat Ra = Q * out.reference * Q.transpose();
  out.extrapolated = Ha;
  out.reference = Ra;
  out.frobenius_residual = (Ha - Ra.cast<Complex>()).norm();
  return out;
}

double recover_finsler(const MAModel& model, const Vec& base, const Vec& X,
                       const std::vector<double>& t_seq) {
  if (X.norm() == 0.0) fail(ErrorCode::ZeroVector, "recover_finsler needs X != 0");
  if (t_seq.empty()) fail(ErrorCode::SpecInvalid, "empty t sequence");
  std::vector<double> xs, ys;
  InverterCache cache;
  for (double t : t_seq) {
    if (!(t > 0)) fail(ErrorCode::SpecInvalid, "t sequence must be positive");
    CVec z(model.metric.dim);
    for (int j = 0; j < model.metric.dim; ++j) z[j] = Complex(base[j], t * X[j]);
    cache.guess.reset();  // reuse the Jacobian, not the (distant) guess
    xs.push_back(t);
    ys.push_back(eval_u_cached(model, z, cache) / t);
  }
  return extrapolate_to_zero(xs, ys);
}

ComplexState leaf_map(const MAModel& model, const SpherePoint& p, double s, double r) {
  return complex_geodesic(model.tube(), p, s, r);
}

double leaf_pullback_residual(const MAModel& model, const SpherePoint& p, double s,
                              double r, double h) {
  if (!(h > 0) || r - h <= 0) fail(ErrorCode::SpecInvalid, "need h > 0 and r > h");
  const TubeContext tube = model.tube();
  InverterCache cache;
  const auto u_at = [&](double ss, double rr) {
    InverterCache c = cache;
    return eval_u_cached(model, complex_geodesic(tube, p, ss, rr).x, c);
  };
  const double w0 = eval_u_cached(model, complex_geodesic(tube, p, s, r).x, cache);
  const double lap = (u_at(s + h, r) + u_at(s - h, r) + u_at(s, r + h) +
                      u_at(s, r - h) - 4.0 * w0) /
                     (h * h);
  return std::abs(lap);
}

double du_directional(const MAModel& model, const CVec& zeta, const RealTangent& dir,
                      double h, InverterCache* cache) {
  const double len = dir.norm();
  if (len == 0.0) return 0.0;
  const RealTangent d = dir / len;
  const int n = model.metric.dim;
  const auto probe = [&](double step) {
    CVec z = zeta;
    for (int j = 0; j < n; ++j) z[j] += Complex(step * d[j], step * d[n + j]);
    InverterCache local = cache ? *cache : InverterCache{};
    return eval_u_cached(model, z, local);
  };
  const auto central = [&](double hh) {
    return (probe(hh) - probe(-hh)) / (2.0 * hh);
  };
  const double D1 = central(h);
  const double D2 = central(0.5 * h);
  return len * (4.0 * D2 - D1) / 3.0;
}

double theta_of(const MAModel& model, const CVec& zeta, const RealTangent& w, double h,
                InverterCache* cache) {
  return -du_directional(model, zeta, apply_J(w), h, cache);
}

FrameFields vector_fields_XY(const MAModel& model, const CVec& zeta, double h) {
  const int n = model.metric.dim;
  const int m = 2 * n;
  TubeStencil st(model, zeta, h, model.fd.richardson);
  const Eigen::MatrixXd H = st.real_hessian([](double u) { return u; });
  const RealTangent grad = st.gradient([](double u) { return u; });

  // theta = d^c u = i(dbar - d)u, so theta(d/dx_j) = -u_{y_j},
  // theta(d/dy_j) = u_{x_j}.
  RealTangent theta(m);
  for (int j = 0; j < n; ++j) {
    theta[j] = -grad[n + j];
    theta[n + j] = grad[j];
  }

  // J e_b as (signed index): b < n -> +e_{n+b};  b >= n -> -e_{b-n}.
  const auto J_index = [n](int b, int& idx, double& sgn) {
    if (b < n) {
      idx = n + b;
      sgn = 1.0;
    } else {
      idx = b - n;
      sgn = -1.0;
    }
  };
  // d theta(e_a, e_b) = -Hess(e_a, J e_b) + Hess(e_b, J e_a)
  // (coordinate fields commute, so the bracket term vanishes).
  Eigen::MatrixXd dtheta(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      int ib, ia;
      double sb, sa;
      J_index(b, ib, sb);
      J_index(a, ia, sa);
      dtheta(a, b) = -sb * H(a, ib) + sa * H(b, ia);
    }

  // Contraction rows: (V . d theta)(e_a) = sum_b V_b d theta(e_b, e_a).
  Eigen::MatrixXd M(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) M(a, b) = dtheta(b, a);

  // The 2-form has rank 2n-2; pick its most independent contraction rows.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M.transpose());
  const auto perm = qr.colsPermutation().indices();

  Eigen::MatrixXd A(m, m);
  A.row(0) = theta.transpose();
  A.row(1) = grad.transpose();
  for (int k = 0; k < m - 2; ++k) A.row(2 + k) = M.row(perm[k]);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    fail(ErrorCode::DegenerateFrame, "frame system (theta, du, d theta) is singular");

  Eigen::VectorXd rhsX = Eigen::VectorXd::Zero(m);
  rhsX[0] = -1.0;
  Eigen::VectorXd rhsY = Eigen::VectorXd::Zero(m);
  rhsY[1] = 1.0;

  FrameFields out;
  out.X = lu.solve(rhsX);
  out.Y = lu.solve(rhsY);
  out.theta_X_residual = std::abs(theta.dot(out.X) + 1.0);
  out.du_X_residual = std::abs(grad.dot(out.X));
  out.dtheta_X_residual = (M * out.X).cwiseAbs().maxCoeff();
  out.theta_Y_residual = std::abs(theta.dot(out.Y));
  out.du_Y_residual = std::abs(grad.dot(out.Y) - 1.0);
  out.dtheta_Y_residual = (M * out.Y).cwiseAbs().maxCoeff();
  out.Y_minus_JX = (out.Y - apply_J(out.X)).norm();
  return out;
}

namespace {

CVec shift_point(const CVec& z, const RealTangent& q) {
  CVec out = z;
  const int n = static_cast<int>(z.size());
  for (int j = 0; j < n; ++j) out[j] += Complex(q[j], q[n + j]);
  return out;
}

// RK4 flow of the X or Y frame field (each stage re-solves the frame system).
CVec flow_frame(const MAModel& model, CVec z, bool use_X, double time, int nsteps) {
  const int m = 2 * model.metric.dim;
  const double h = time / nsteps;
  const auto field = [&](const CVec& at) -> RealTangent {
    const FrameFields f = vector_fields_XY(model, at, model.fd.hessian_step);
    return use_X ? f.X : f.Y;
  };
  for (int i = 0; i < nsteps; ++i) {
    const RealTangent k1 = field(z);
    const RealTangent k2 = field(shift_point(z, RealTangent(0.5 * h * k1)));
    const RealTangent k3 = field(shift_point(z, RealTangent(0.5 * h * k2)));
    const RealTangent k4 = field(shift_point(z, RealTangent(h * k3)));
    RealTangent step = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    z = shift_point(z, step);
    (void)m;
  }
  return z;
}

}  // namespace

double flow_commutation_defect(const MAModel& model, const CVec& zeta, double time,
                               int nsteps) {
  const CVec xy = flow_frame(model, flow_frame(model, zeta, true, time, nsteps), false,
                             time, nsteps);
  const CVec yx = flow_frame(model, flow_frame(model, zeta, false, time, nsteps), true,
                             time, nsteps);
  return tube_distance(xy, yx);
}

}  // namespace matube
