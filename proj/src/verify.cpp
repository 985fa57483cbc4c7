#include "matube/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

#include "matube/blowup.hpp"
#include "matube/sampling.hpp"

namespace matube {

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

struct Samplers {
  const MAModel& model;
  std::uint64_t seed;

  SpherePoint ray_at(QuasiRandom& qr) const {
    const int n = model.metric.dim;
    const auto u = qr.next();
    SpherePoint p;
    p.base = Vec(n);
    for (int j = 0; j < n; ++j) p.base[j] = kTwoPi * u[j];
    p.ray = (n == 1) ? (u[n] < 0.5 ? -1.0 : 1.0) : kTwoPi * u[n];
    p.canonicalize();
    return p;
  }
};

// Generate deterministic sample sets up front so that worker threads only
// index into them.
std::vector<SpherePoint> sample_rays(const MAModel& model, std::uint64_t seed, int count) {
  QuasiRandom qr(model.metric.dim + 1, seed);
  Samplers s{model, seed};
  std::vector<SpherePoint> out;
  for (int i = 0; i < count; ++i) out.push_back(s.ray_at(qr));
  return out;
}

struct TubeSample {
  SpherePoint p;
  double r;
  CVec zeta;
};

std::vector<TubeSample> sample_tube_points(const MAModel& model, std::uint64_t seed,
                                           int count, double r_lo_frac, double r_hi_frac) {
  QuasiRandom qr(model.metric.dim + 2, seed);
  std::vector<TubeSample> out;
  const int n = model.metric.dim;
  for (int i = 0; i < count; ++i) {
    const auto u = qr.next();
    TubeSample t;
    t.p.base = Vec(n);
    for (int j = 0; j < n; ++j) t.p.base[j] = kTwoPi * u[j];
    t.p.ray = (n == 1) ? (u[n] < 0.5 ? -1.0 : 1.0) : kTwoPi * u[n];
    t.p.canonicalize();
    const double f = r_lo_frac + (r_hi_frac - r_lo_frac) * u[n + 1];
    t.r = f * model.R;
    t.zeta = mu_point(model.tube(), t.p, t.r);
    out.push_back(t);
  }
  return out;
}

using SampleFn = std::function<double(int)>;

CheckResult run_check(const std::string& name, const std::string& anchor, double tol,
                      int count, int threads, const SampleFn& fn) {
  CheckResult res;
  res.name = name;
  res.anchor = anchor;
  res.tolerance = tol;
  res.samples = count;
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<double> vals(count, 0.0);
  std::vector<std::string> errs(count);
  parallel_for(count, threads, [&](int i) {
    try {
      vals[i] = fn(i);
    } catch (const std::exception& e) {
      vals[i] = std::numeric_limits<double>::infinity();
      errs[i] = e.what();
    }
  });

  double mx = 0.0, sum = 0.0;
  for (int i = 0; i < count; ++i) {
    mx = std::max(mx, vals[i]);
    sum += vals[i];
    if (!errs[i].empty() && res.error.empty()) res.error = errs[i];
  }
  res.max_residual = mx;
  res.mean_residual = count > 0 ? sum / count : 0.0;
  res.pass = res.max_residual <= res.tolerance && res.error.empty();
  res.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return res;
}

double deficit(double value, double threshold) {
  return std::max(0.0, threshold - value);
}

}  // namespace

VerificationReport run_verification(const MAModel& model, const VerifyOptions& options) {
  VerificationReport report;
  report.model_meta = model_to_json(model);
  report.seed = options.seed;
  report.samples = options.samples;
  report.suites = options.suites.empty() ? all_suites() : options.suites;
  for (const std::string& s : report.suites)
    if (std::find(all_suites().begin(), all_suites().end(), s) == all_suites().end())
      fail(ErrorCode::SpecInvalid, "unknown suite '" + s + "'");

  const int N = options.samples;
  const int threads = std::max(1, options.threads);
  const int n = model.metric.dim;
  const double h = model.fd.hessian_step;
  const bool flat = model.metric.is_flat();
  const auto enabled = [&](const char* s) {
    return std::find(report.suites.begin(), report.suites.end(), s) != report.suites.end();
  };

  if (enabled("ma")) {
    const auto pts = sample_tube_points(model, options.seed ^ 0x6d61ull, N, 0.15, 0.9);
    std::vector<MaResidual> res(pts.size());
    report.checks.push_back(run_check(
        "ma_det", "(dd^c u)^n = 0 off the zero set", flat ? 1e-6 : 1e-3, N, threads,
        [&](int i) {
          res[i] = ma_residual(model, pts[i].zeta, h);
          return res[i].normalized_det;
        }));
    if (n >= 2) {
      report.checks.push_back(run_check(
          "ma_rank", "(dd^c u)^{n-1} != 0 (rank n-1 witness)", 0.0, N, threads,
          [&](int i) { return deficit(res[i].second_smallest_eig, 1e-3); }));
    }
  }

  if (enabled("psh")) {
    const auto pts = sample_tube_points(model, options.seed ^ 0x707368ull, N, 0.15, 0.9);
    report.checks.push_back(run_check(
        "psh_min_eig", "dd^c(u^2) > 0 off the zero set", 0.0, N, threads, [&](int i) {
          return deficit(psh_min_eig(model, pts[i].zeta, h), 1e-12);
        }));
    const auto rays = sample_rays(model, options.seed ^ 0x626479ull, std::max(1, N / 2));
    report.checks.push_back(run_check(
        "boundary_hessian", "H_C(u^2) = (1/4) H_R(F^2) at r = 0", 5e-3,
        static_cast<int>(rays.size()), threads, [&](int i) {
          return boundary_hessian_check(model, rays[i]).frobenius_residual;
        }));
  }

  if (enabled("hilbert")) {
    const auto rays = sample_rays(model, options.seed ^ 0x68696cull, N);
    report.checks.push_back(run_check(
        "hilbert_contact", "theta_F = -theta_S on SM", 1e-3, N, threads,
        [&](int i) { return hilbert_contact_residual(model, rays[i]); }));
    const auto rays2 = sample_rays(model, options.seed ^ 0x70726full, std::max(1, N / 2));
    report.checks.push_back(run_check(
        "profile_formula", "theta_S = -(U - p dU/dp) ds - (dU/dp) dx", 1e-3,
        static_cast<int>(rays2.size()), threads, [&](int i) {
          return profile_formula_check(model, rays2[i]).max_residual;
        }));
  }

  if (enabled("leaf")) {
    const int rays_n = std::max(1, std::min(N, 20));
    const auto rays = sample_rays(model, options.seed ^ 0x6c6631ull, rays_n);
    const TubeContext tube = model.tube();
    report.checks.push_back(run_check(
        "leaf_geodesic", "leaves meet the zero set along unit-speed geodesics", 1e-8,
        rays_n, threads, [&](int i) {
          double worst = 0.0;
          for (int k = 0; k <= 10; ++k) {
            const double s = 0.1 * k;
            const CVec zl = complex_geodesic(tube, rays[i], s, 0.0).x;
            const RealState g = integrate_geodesic(model.metric, rays[i], s, model.cfg);
            double d2 = 0.0;
            for (int j = 0; j < n; ++j) {
              const double dr = wrap_delta(zl[j].real() - g.x[j]);
              d2 += dr * dr + zl[j].imag() * zl[j].imag();
            }
            worst = std::max(worst, std::sqrt(d2));
          }
          return worst;
        }));
    const auto pts = sample_tube_points(model, options.seed ^ 0x6c6632ull, N, 0.2, 0.8);
    report.checks.push_back(run_check(
        "leaf_cr", "z -> leaf(z) is holomorphic in z = s + ir", 1e-5, N, threads,
        [&](int i) {
          const double s = 0.1 + 0.8 * (i % 7) / 7.0;
          return cauchy_riemann_residual(tube, pts[i].p, s, pts[i].r, 1e-3);
        }));
    report.checks.push_back(run_check(
        "leaf_height", "u(leaf(s + ir)) = r", 1e-9, N, threads, [&](int i) {
          const double s = 0.05 + 0.9 * (i % 5) / 5.0;
          const CVec z = complex_geodesic(tube, pts[i].p, s, pts[i].r).x;
          return std::abs(eval_u(model, z) - pts[i].r);
        }));
    report.checks.push_back(run_check(
        "leaf_pullback", "pullback of dd^c u to each leaf vanishes", 1e-5, N, threads,
        [&](int i) {
          const double s = 0.05 + 0.9 * (i % 5) / 5.0;
          return leaf_pullback_residual(model, pts[i].p, s, pts[i].r, 1e-3);
        }));
  }

  if (enabled("roundtrip")) {
    QuasiRandom qr(n + 2, options.seed ^ 0x727431ull);
    struct XSample {
      Vec base;
      Vec X;
    };
    std::vector<XSample> xs;
    for (int i = 0; i < N; ++i) {
      const auto u = qr.next();
      XSample s;
      s.base = Vec(n);
      for (int j = 0; j < n; ++j) s.base[j] = kTwoPi * u[j];
      const double mag = 0.5 + 1.5 * u[n + 1];
      s.X = Vec(n);
      if (n == 1)
        s.X[0] = (u[n] < 0.5 ? -1.0 : 1.0) * mag;
      else {
        s.X[0] = mag * std::cos(kTwoPi * u[n]);
        s.X[1] = mag * std::sin(kTwoPi * u[n]);
      }
      xs.push_back(s);
    }
    report.checks.push_back(run_check(
        "metric_roundtrip", "F(X) = lim u(c(t))/t with c'(0) = JX", 1e-3, N, threads,
        [&](int i) {
          const double F = eval_F<double>(model.metric, xs[i].base, xs[i].X);
          const double rec = recover_finsler(model, xs[i].base, xs[i].X);
          return std::abs(rec - F) / F;
        }));
    const auto pts = sample_tube_points(model, options.seed ^ 0x727432ull, N, 0.1, 0.9);
    report.checks.push_back(run_check(
        "mu_roundtrip", "mu^{-1}(mu(p, r)) = (p, r)", 1e-10, N, threads, [&](int i) {
          const TubeCoordinates tc = invert_mu(model, pts[i].zeta);
          double err = std::abs(tc.r - pts[i].r);
          for (int j = 0; j < n; ++j)
            err = std::max(err, std::abs(wrap_delta(tc.p.base[j] - pts[i].p.base[j])));
          err = std::max(err, n == 1 ? std::abs(tc.p.ray - pts[i].p.ray)
                                     : std::abs(wrap_delta(tc.p.ray - pts[i].p.ray)));
          return err;
        }));
  }

  if (enabled("contact") && n == 2) {
    const auto rays = sample_rays(model, options.seed ^ 0x636f6eull, N);
    report.checks.push_back(run_check(
        "contact_volume", "theta_S ^ d theta_S != 0 on SM", 0.0, N, threads,
        [&](int i) { return deficit(std::abs(contact_volume(model, rays[i])), 0.05); }));
  }

  if (enabled("frames")) {
    const int fn_count = std::max(1, N / 2);
    const auto pts =
        sample_tube_points(model, options.seed ^ 0x667273ull, fn_count, 0.25, 0.75);
    std::vector<FrameFields> ff(pts.size());
    report.checks.push_back(run_check(
        "frame_contractions", "X.theta = -1, X.du = 0; Y.theta = 0, Y.du = 1", 1e-8,
        fn_count, threads, [&](int i) {
          ff[i] = vector_fields_XY(model, pts[i].zeta, h);
          return std::max({ff[i].theta_X_residual, ff[i].du_X_residual,
                           ff[i].theta_Y_residual, ff[i].du_Y_residual});
        }));
    report.checks.push_back(
        run_check("frame_dtheta", "X . d theta = 0 and Y . d theta = 0", 1e-8, fn_count,
                  threads, [&](int i) {
                    return std::max(ff[i].dtheta_X_residual, ff[i].dtheta_Y_residual);
                  }));
    report.checks.push_back(run_check(
        "frame_jx", "Y = JX off the zero set", 1e-6, fn_count, threads,
        [&](int i) { return ff[i].Y_minus_JX; }));
    const int cm_count = std::min(2, fn_count);
    report.checks.push_back(run_check(
        "frame_commute", "[X, Y] = 0 (flow composition order)", 1e-6, cm_count, threads,
        [&](int i) { return flow_commutation_defect(model, pts[i].zeta, 0.1); }));
  }

  return report;
}

}  // namespace matube
