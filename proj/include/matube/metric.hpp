#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "matube/types.hpp"

namespace matube {

enum class MetricFamily { riemannian_conformal, randers, minkowski };

const char* family_name(MetricFamily f);
MetricFamily family_from_name(const std::string& name);

// One trigonometric mode of the conformal factor:
// lambda(x) += a*cos(k.x) + b*sin(k.x).
struct ConformalMode {
  std::array<int, kMaxDim> k{};
  double a = 0.0;
  double b = 0.0;
};

// Analytic Finsler metric on the flat-chart torus T^n (n = 1 or 2), with an
// entire extension to complex x and to complex v off the null cone of |v|^2.
//   riemannian_conformal:  F = lambda(x) * |v|
//   randers / minkowski:   F = |v| + b.v   (b constant, |b| < 1)
struct FinslerMetric {
  MetricFamily family = MetricFamily::riemannian_conformal;
  int dim = 2;
  std::vector<ConformalMode> conformal;  // riemannian_conformal only
  Vec b;                                 // randers / minkowski only
  double branch_margin = 1e-6;           // exclusion zone around |v|^2 = 0

  // 1 - sum(|a_k| + |b_k|); positivity of this certifies lambda > 0.
  double conformal_reserve() const;

  bool is_flat() const;  // x-independent geodesic spray (straight lines)

  void validate() const;  // throws SpecInvalid

  static FinslerMetric euclidean(int n);
  static FinslerMetric randers_drift(const Vec& b);
  static FinslerMetric minkowski_drift(const Vec& b);
  // lambda(x) = 1 + a*cos(k.x) + b*sin(k.x) on T^n.
  static FinslerMetric conformal_mode(int n, const std::array<int, kMaxDim>& k,
                                      double a, double b);

  static FinslerMetric from_json(const nlohmann::json& j);
  void to_json(nlohmann::ordered_json& j) const;
};

FinslerMetric load_metric_spec(const std::string& path);

// F and its derivatives at (x, v), real (S = double) or complex. Real and
// complex evaluation share this single code path.
template <class S>
struct MetricJet {
  S F{};
  VecX<S> F_v;   // Hilbert coefficients dF/dv
  MatX<S> F_vv;  // d2F/dv dv
  VecX<S> F_x;   // dF/dx
  MatX<S> F_xv;  // (k,j) = d2F / dx^k dv^j
};

namespace detail {

template <class S>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

// Bilinear |v|^2 = sum v_j^2 (no conjugation) and its principal square root.
// Real arguments reject only v = 0; complex arguments reject the configured
// margin around the branch point.
template <class S>
S bilinear_norm(const VecX<S>& v, double margin) {
  S q{};
  for (int j = 0; j < v.size(); ++j) q += v[j] * v[j];
  if constexpr (is_complex<S>::value) {
    if (std::abs(q) < margin)
      fail(ErrorCode::BranchCutProximity,
           "|sum v_j^2| below branch margin during complex evaluation");
  } else {
    if (!(std::abs(q) > 0.0)) fail(ErrorCode::ZeroVector, "F evaluated at v = 0");
  }
  using std::sqrt;
  return sqrt(q);
}

template <class S>
struct ConformalJet {
  S lambda{};
  VecX<S> grad;  // d lambda / d x
};

template <class S>
ConformalJet<S> conformal_factor(const FinslerMetric& m, const VecX<S>& x) {
  ConformalJet<S> out;
  out.lambda = S(1.0);
  out.grad = VecX<S>::Zero(m.dim);
  using std::cos;
  using std::sin;
  for (const ConformalMode& mode : m.conformal) {
    S phase{};
    for (int j = 0; j < m.dim; ++j) phase += S(double(mode.k[j])) * x[j];
    const S c = cos(phase);
    const S s = sin(phase);
    out.lambda += S(mode.a) * c + S(mode.b) * s;
    const S d = -S(mode.a) * s + S(mode.b) * c;
    for (int j = 0; j < m.dim; ++j) out.grad[j] += S(double(mode.k[j])) * d;
  }
  return out;
}

}  // namespace detail

template <class S>
MetricJet<S> metric_jet(const FinslerMetric& m, const VecX<S>& x, const VecX<S>& v) {
  const int n = m.dim;
  MetricJet<S> jet;
  jet.F_v = VecX<S>::Zero(n);
  jet.F_vv = MatX<S>::Zero(n, n);
  jet.F_x = VecX<S>::Zero(n);
  jet.F_xv = MatX<S>::Zero(n, n);

  const S N = detail::bilinear_norm<S>(v, m.branch_margin);
  const S invN = S(1.0) / N;
  // d2|v|/dvdv = (I - v v^T / N^2) / N, bilinear in v.
  MatX<S> norm_hess(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      norm_hess(i, j) = (S(i == j ? 1.0 : 0.0) - v[i] * v[j] * invN * invN) * invN;

  switch (m.family) {
    case MetricFamily::riemannian_conformal: {
      const auto cf = detail::conformal_factor<S>(m, x);
      jet.F = cf.lambda * N;
      for (int j = 0; j < n; ++j) jet.F_v[j] = cf.lambda * v[j] * invN;
      jet.F_vv = cf.lambda * norm_hess;
      for (int k = 0; k < n; ++k) {
        jet.F_x[k] = cf.grad[k] * N;
        for (int j = 0; j < n; ++j) jet.F_xv(k, j) = cf.grad[k] * v[j] * invN;
      }
      break;
    }
    case MetricFamily::randers:
    case MetricFamily::minkowski: {
      S bv{};
      for (int j = 0; j < n; ++j) bv += S(m.b[j]) * v[j];
      jet.F = N + bv;
      for (int j = 0; j < n; ++j) jet.F_v[j] = v[j] * invN + S(m.b[j]);
      jet.F_vv = norm_hess;
      break;
    }
  }
  return jet;
}

template <class S>
S eval_F(const FinslerMetric& m, const VecX<S>& x, const VecX<S>& v) {
  return metric_jet<S>(m, x, v).F;
}

template <class S>
VecX<S> hilbert_coefficients(const FinslerMetric& m, const VecX<S>& x, const VecX<S>& v) {
  return metric_jet<S>(m, x, v).F_v;
}

// Fundamental tensor g = (1/2) d2(F^2)/dvdv = F * F_vv + F_v F_v^T.
template <class S>
MatX<S> fundamental_tensor(const FinslerMetric& m, const VecX<S>& x, const VecX<S>& v) {
  const MetricJet<S> jet = metric_jet<S>(m, x, v);
  MatX<S> g = jet.F * jet.F_vv;
  for (int i = 0; i < m.dim; ++i)
    for (int j = 0; j < m.dim; ++j) g(i, j) += jet.F_v[i] * jet.F_v[j];
  return g;
}

// |F(x, t v) - t F(x, v)|; the spec contract is <= 1e-12 for shipped families.
double check_homogeneity(const FinslerMetric& m, const Vec& x, const Vec& v, double t);

}  // namespace matube
