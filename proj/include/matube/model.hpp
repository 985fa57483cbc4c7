#pragma once

#include <optional>
#include <vector>

#include "matube/complexify.hpp"

namespace matube {

struct NewtonConfig {
  double tol = 1e-12;
  int max_iter = 50;

  void validate() const {
    if (!(tol > 0) || max_iter < 1) fail(ErrorCode::SpecInvalid, "bad Newton config");
  }
};

struct FdConfig {
  double hessian_step = 1e-3;
  double gradient_step = 1e-4;
  bool richardson = true;  // one (h, h/2) extrapolation level
};

struct BuildDiagnostics {
  double requested_R = 0.0;
  int attempts = 0;
  int pilot_samples = 0;
  double min_immersion_sv = 0.0;    // smallest singular value of d mu
  double min_pair_separation = 0.0; // injectivity witness over pilot pairs
  double max_roundtrip_error = 0.0; // invert_mu . mu identity on pilot points
};

// The assembled Monge-Ampere model of (T^n, F): tube height R, integrator and
// Newton settings, plus the pilot diagnostics recorded by the build.
// Immutable after build_model; every query below is a pure function of it.
struct MAModel {
  FinslerMetric metric;
  double R = 0.5;
  IntegratorConfig cfg;
  NewtonConfig newton;
  FdConfig fd;
  double s_max = 20.0;
  BuildDiagnostics diag;

  TubeContext tube() const { return TubeContext{metric, R, cfg, s_max}; }
};

// Construct a model, halving R (down to R_min = 0.05) until the pilot
// injectivity / immersion / inversion diagnostics pass.
MAModel build_model(const FinslerMetric& metric, double requested_R,
                    const IntegratorConfig& cfg = IntegratorConfig{},
                    const NewtonConfig& newton = NewtonConfig{},
                    const FdConfig& fd = FdConfig{});

// Tube coordinates (p, r) in SM x [0, R) with mu(p, r) = zeta.
struct TubeCoordinates {
  SpherePoint p;
  double r = 0.0;
};

// Reusable Newton state for batched nearby queries (stencils): a warm initial
// guess and a frozen Jacobian. Purely an accelerator; results agree with the
// cold path to Newton tolerance.
struct InverterCache {
  std::optional<TubeCoordinates> guess;
  std::optional<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2 * kMaxDim,
                              2 * kMaxDim>>
      jacobian;
};

TubeCoordinates invert_mu(const MAModel& model, const CVec& zeta);
TubeCoordinates invert_mu_cached(const MAModel& model, const CVec& zeta,
                                 InverterCache& cache);

// u(zeta): the tube height r of the Newton inversion; 0 on the zero set
// (|Im zeta| < 1e-14).
double eval_u(const MAModel& model, const CVec& zeta);
double eval_u_cached(const MAModel& model, const CVec& zeta, InverterCache& cache);

enum class FieldTag { u, u_squared, tau };  // tau = u^2 / 2

// Complex Hessian d2 f / dz^j dz~k by central differences of the real
// Hessian, Hermitian-symmetrized; one Richardson level when fd.richardson.
CMat complex_hessian(const MAModel& model, FieldTag tag, const CVec& zeta, double h);

struct TubeHessians {
  CMat H_u;
  CMat H_u2;
  double u = 0.0;
  double hermitian_defect = 0.0;  // pre-symmetrization diagnostic
};

// H_C(u) and H_C(u^2) from one shared stencil.
TubeHessians tube_hessians(const MAModel& model, const CVec& zeta, double h);

struct MaResidual {
  double normalized_det = 0.0;     // |det H_C(u)| / ||H_C(u)||_op^n
  double second_smallest_eig = 0.0;  // rank n-1 witness (NaN for n = 1)
  Vec eigenvalues;                 // ascending
  double u = 0.0;
};

MaResidual ma_residual(const MAModel& model, const CVec& zeta, double h);

// Smallest eigenvalue of H_C(u^2) at an interior tube point.
double psh_min_eig(const MAModel& model, const CVec& zeta, double h);

struct BoundaryHessian {
  CMat extrapolated;       // H_C(u^2) Richardson-extrapolated to r = 0
  Mat reference;           // (1/4) H_R(F^2) = g/2 at the matched ray
  double frobenius_residual = 0.0;
};

// Boundary identity H_C(u^2) = (1/4) H_R(F^2): compare at r in r_pair
// (defaults {0.02, 0.01}), extrapolated linearly to r = 0, in the frame
// rotated so the ray is the last axis.
BoundaryHessian boundary_hessian_check(const MAModel& model, const SpherePoint& p,
                                       double r1 = 0.02, double r2 = 0.01);

// F(X) recovered from the model: Richardson limit of u(base + i t X)/t over
// t_seq (default {0.02, 0.01, 0.005}).
double recover_finsler(const MAModel& model, const Vec& base, const Vec& X,
                       const std::vector<double>& t_seq = {0.02, 0.01, 0.005});

// Leaf parameterization of the Monge-Ampere foliation; identical to the
// complexified geodesic by construction of the model.
ComplexState leaf_map(const MAModel& model, const SpherePoint& p, double s, double r);

// Finite-difference pullback of dd^c u to the leaf: the (s, r)-Laplacian of
// u(leaf(s + i r)) over a 5-point stencil of width h.
double leaf_pullback_residual(const MAModel& model, const SpherePoint& p, double s,
                              double r, double h);

// Directional derivative of u along a real tangent direction (central
// differences at step h, Richardson); dir need not be normalized.
double du_directional(const MAModel& model, const CVec& zeta, const RealTangent& dir,
                      double h, InverterCache* cache = nullptr);

// theta = d^c u with d^c = i(dbar - d), so theta(W) = -du(JW).
double theta_of(const MAModel& model, const CVec& zeta, const RealTangent& w,
                double h, InverterCache* cache = nullptr);

struct FrameFields {
  RealTangent X;  // X . theta = -1, X . du = 0, X . d theta = 0
  RealTangent Y;  // Y . theta = 0,  Y . du = 1, Y . d theta = 0
  double theta_X_residual = 0.0;   // |theta(X) + 1|
  double du_X_residual = 0.0;      // |du(X)|
  double dtheta_X_residual = 0.0;  // ||X . d theta||_inf over all frame rows
  double theta_Y_residual = 0.0;
  double du_Y_residual = 0.0;
  double dtheta_Y_residual = 0.0;
  double Y_minus_JX = 0.0;         // ||Y - JX||_2
};

FrameFields vector_fields_XY(const MAModel& model, const CVec& zeta, double h);

// Compose the flows of X and Y in both orders for the given time and return
// the chart distance between the endpoints (commutation defect).
double flow_commutation_defect(const MAModel& model, const CVec& zeta, double time,
                               int nsteps = 4);

}  // namespace matube
