#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "matube/errors.hpp"

namespace matube {

// Manifold dimension is runtime (1 or 2); all containers are stack-allocated
// with capacity kMaxDim so nothing in the hot path touches the heap.
inline constexpr int kMaxDim = 2;

template <class S>
using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Vec = VecX<double>;
using CVec = VecX<std::complex<double>>;

template <class S>
using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using Mat = MatX<double>;
using CMat = MatX<std::complex<double>>;

// Flattened (x, v) phase-space vectors, and real tangent vectors of the
// complexification (dx_1..dx_n, dy_1..dy_n).
template <class S>
using PhaseVec = Eigen::Matrix<S, Eigen::Dynamic, 1, 0, 2 * kMaxDim, 1>;
using RealTangent = PhaseVec<double>;

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wrap into [0, 2*pi).
inline double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0) w += kTwoPi;
  return w;
}

// Wrap into (-pi, pi]; the nearest-representative difference on the circle.
inline double wrap_delta(double d) {
  double w = std::fmod(d, kTwoPi);
  if (w > kTwoPi / 2) w -= kTwoPi;
  if (w <= -kTwoPi / 2) w += kTwoPi;
  return w;
}

inline Vec wrap_delta(const Vec& d) {
  Vec w = d;
  for (int j = 0; j < w.size(); ++j) w[j] = wrap_delta(w[j]);
  return w;
}

// Chart distance on the complexified torus: real parts compared mod 2*pi,
// imaginary parts as plain reals.
inline double tube_distance(const CVec& a, const CVec& b) {
  double s = 0.0;
  for (int j = 0; j < a.size(); ++j) {
    double dr = wrap_delta(a[j].real() - b[j].real());
    double di = a[j].imag() - b[j].imag();
    s += dr * dr + di * di;
  }
  return std::sqrt(s);
}

// Point of the projectivized tangent bundle SM: a base point on the torus and
// a canonical oriented ray (angle in [0,2*pi) for n=2, sign for n=1).
struct SpherePoint {
  Vec base;
  double ray = 0.0;

  int dim() const { return static_cast<int>(base.size()); }

  void canonicalize() {
    for (int j = 0; j < base.size(); ++j) base[j] = wrap_angle(base[j]);
    if (dim() == 1) {
      ray = (ray < 0) ? -1.0 : 1.0;
    } else {
      ray = wrap_angle(ray);
    }
  }

  Vec unit_dir() const {
    Vec d(dim());
    if (dim() == 1) {
      d[0] = (ray < 0) ? -1.0 : 1.0;
    } else {
      d[0] = std::cos(ray);
      d[1] = std::sin(ray);
    }
    return d;
  }

  static SpherePoint from_direction(const Vec& base, const Vec& dir) {
    if (dir.norm() == 0.0) fail(ErrorCode::ZeroVector, "ray direction is zero");
    SpherePoint p;
    p.base = base;
    if (base.size() == 1) {
      p.ray = (dir[0] < 0) ? -1.0 : 1.0;
    } else {
      p.ray = std::atan2(dir[1], dir[0]);
    }
    p.canonicalize();
    return p;
  }
};

// (position, velocity) pair carried through the geodesic flow, real or
// complex depending on S.
template <class S>
struct GeodesicState {
  VecX<S> x;
  VecX<S> v;

  int dim() const { return static_cast<int>(x.size()); }

  PhaseVec<S> flatten() const {
    PhaseVec<S> y(2 * x.size());
    y.segment(0, x.size()) = x;
    y.segment(x.size(), x.size()) = v;
    return y;
  }

  static GeodesicState unflatten(const PhaseVec<S>& y) {
    GeodesicState s;
    const int n = static_cast<int>(y.size()) / 2;
    s.x = y.segment(0, n);
    s.v = y.segment(n, n);
    return s;
  }
};

using RealState = GeodesicState<double>;
using ComplexState = GeodesicState<Complex>;

inline ComplexState to_complex(const RealState& s) {
  ComplexState c;
  c.x = s.x.cast<Complex>();
  c.v = s.v.cast<Complex>();
  return c;
}

struct IntegratorConfig {
  enum class Method { fixed_rk4, adaptive };

  Method method = Method::adaptive;
  double step = 1e-3;      // fixed-step mode and complex-time paths
  double abs_tol = 1e-10;  // adaptive mode
  double rel_tol = 1e-10;

  void validate() const {
    if (!(step > 0)) fail(ErrorCode::SpecInvalid, "integrator step must be > 0");
    if (!(abs_tol > 0) || !(rel_tol > 0))
      fail(ErrorCode::SpecInvalid, "integrator tolerances must be > 0");
  }
};

// Tangent vector to SM at a SpherePoint: base motion plus ray motion
// (d/dphi for n=2; unused for n=1, where SM is a disjoint union of circles).
struct SMVector {
  Vec dx;
  double dray = 0.0;
};

// J acting on real tangent vectors of the complexification:
// J d/dx_j = d/dy_j, J d/dy_j = -d/dx_j.
inline RealTangent apply_J(const RealTangent& w) {
  const int n = static_cast<int>(w.size()) / 2;
  RealTangent jw(2 * n);
  jw.segment(0, n) = -w.segment(n, n);
  jw.segment(n, n) = w.segment(0, n);
  return jw;
}

}  // namespace matube
