/*
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not
 * use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
 * WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
 * License for the specific language governing permissions and limitations
 * under the License.
 */
#pragma once

#include <lfslab/types.hpp>

#include <algorithm>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace lfslab {

enum class SurfaceKind { Sphere, Torus, Ellipsoid, MetaballBlend };

std::string_view to_string(SurfaceKind kind);

struct SphereParams {
  Vector3d center = Vector3d::Zero();
  double radius = 1.0;
};

/// Torus centered at the origin with the z axis as its axis of revolution.
struct TorusParams {
  double major = 2.0;
  double minor = 1.0;
};

/// Axis-aligned ellipsoid centered at the origin, semi-axes a >= b >= c.
struct EllipsoidParams {
  Vector3d semi_axes = Vector3d::Ones();
};

struct Metaball {
  Vector3d center = Vector3d::Zero();
  double radius = 1.0;
  double weight = 1.0;
};

/// Smooth minimum of per-ball sphere fields,
///   F(x) = -(1/k) log sum_i w_i exp(-k g_i(x)),
///   g_i(x) = (|x - c_i|^2 - R_i^2) / (2 R_i),
/// with k the blend exponent.
struct MetaballParams {
  std::vector<Metaball> balls;
  double sharpness = 8.0;
};

using SurfaceParams =
    std::variant<SphereParams, TorusParams, EllipsoidParams, MetaballParams>;

template <typename Scalar>
struct FieldSample {
  Scalar value;
  Vec3<Scalar> gradient;
  Mat3<Scalar> hessian;
};

// Catalog fields. F < 0 inside every surface. These are templated so tests
// can evaluate them in extended precision as an independent reference.

template <typename Scalar>
FieldSample<Scalar> sphere_field(const SphereParams& s, const Vec3<Scalar>& x) {
  const Vec3<Scalar> d = x - s.center.cast<Scalar>();
  const Scalar r = static_cast<Scalar>(s.radius);
  return {d.squaredNorm() - r * r, Scalar(2) * d,
          Scalar(2) * Mat3<Scalar>::Identity()};
}

/// F = (rho - R)^2 + z^2 - r^2 with rho = sqrt(x^2 + y^2). Not differentiable
/// on the z axis (rho = 0), which lies on the medial axis.
template <typename Scalar>
FieldSample<Scalar> torus_field(const TorusParams& t, const Vec3<Scalar>& x) {
  using std::sqrt;
  const Scalar big = static_cast<Scalar>(t.major);
  const Scalar small = static_cast<Scalar>(t.minor);
  const Scalar rho = sqrt(x.x() * x.x() + x.y() * x.y());
  const Scalar dr = rho - big;
  FieldSample<Scalar> out;
  out.value = dr * dr + x.z() * x.z() - small * small;
  out.gradient << Scalar(2) * dr * x.x() / rho, Scalar(2) * dr * x.y() / rho,
      Scalar(2) * x.z();
  const Scalar rho3 = rho * rho * rho;
  out.hessian.setZero();
  out.hessian(0, 0) = Scalar(2) * (Scalar(1) - big / rho + big * x.x() * x.x() / rho3);
  out.hessian(1, 1) = Scalar(2) * (Scalar(1) - big / rho + big * x.y() * x.y() / rho3);
  out.hessian(0, 1) = out.hessian(1, 0) = Scalar(2) * big * x.x() * x.y() / rho3;
  out.hessian(2, 2) = Scalar(2);
  return out;
}

template <typename Scalar>
FieldSample<Scalar> ellipsoid_field(const EllipsoidParams& e, const Vec3<Scalar>& x) {
  const Vec3<Scalar> inv_sq =
      e.semi_axes.cast<Scalar>().array().square().inverse().matrix();
  FieldSample<Scalar> out;
  out.value = (x.array().square() * inv_sq.array()).sum() - Scalar(1);
  out.gradient = Scalar(2) * x.cwiseProduct(inv_sq);
  out.hessian = (Scalar(2) * inv_sq).asDiagonal();
  return out;
}

template <typename Scalar>
FieldSample<Scalar> metaball_field(const MetaballParams& m, const Vec3<Scalar>& x) {
  using std::exp;
  using std::log;
  const Scalar k = static_cast<Scalar>(m.sharpness);
  const std::size_t n = m.balls.size();
  std::vector<Scalar> g(n);
  Scalar g_min = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = m.balls[i];
    const Scalar r = static_cast<Scalar>(b.radius);
    g[i] = ((x - b.center.cast<Scalar>()).squaredNorm() - r * r) / (Scalar(2) * r);
    g_min = std::min(g_min, g[i]);
  }
  // log-sum-exp shifted by the smallest g keeps every exponent <= 0.
  std::vector<Scalar> s(n);
  Scalar total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = static_cast<Scalar>(m.balls[i].weight) * exp(-k * (g[i] - g_min));
    total += s[i];
  }
  FieldSample<Scalar> out;
  out.value = g_min - log(total) / k;
  out.gradient.setZero();
  out.hessian.setZero();
  Mat3<Scalar> outer = Mat3<Scalar>::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    s[i] /= total;
    const auto& b = m.balls[i];
    const Scalar r = static_cast<Scalar>(b.radius);
    const Vec3<Scalar> grad_i = (x - b.center.cast<Scalar>()) / r;
    out.gradient += s[i] * grad_i;
    out.hessian += (s[i] / r) * Mat3<Scalar>::Identity();
    outer += s[i] * grad_i * grad_i.transpose();
  }
  out.hessian -= k * (outer - out.gradient * out.gradient.transpose());
  return out;
}

/// A closed, connected, smooth implicit surface F^{-1}(0) from the catalog.
///
/// Immutable once built; copies share state. Construction also walks a coarse
/// grid onto the surface to produce the seed cloud used by multi-start
/// projection, and rejects parameter sets whose zero level set is not
/// regular.
class ImplicitSurface {
 public:
  static ImplicitSurface sphere(const Vector3d& center, double radius);
  static ImplicitSurface torus(double major, double minor);
  static ImplicitSurface ellipsoid(double a, double b, double c);
  static ImplicitSurface metaball_blend(std::vector<Metaball> balls, double sharpness);

  /// Build from a catalog name ("sphere", "torus", "ellipsoid",
  /// "metaball_blend") and a flat parameter map.
  static ImplicitSurface from_catalog(std::string_view name,
                                      const std::map<std::string, std::string>& params);

  SurfaceKind kind() const { return state_->kind; }
  std::string_view name() const { return to_string(kind()); }
  const SurfaceParams& params() const { return state_->params; }

  const Box3d& bounding_box() const { return state_->box; }
  double diagonal() const { return state_->diagonal; }
  /// |F(p)| <= on_surface_tol() defines "p lies on the surface".
  double on_surface_tol() const { return 1e-10 * state_->diagonal; }

  /// Raw field evaluation in any scalar type; no domain checks.
  template <typename Scalar>
  FieldSample<Scalar> field(const Vec3<Scalar>& x) const {
    return std::visit(
        [&](const auto& p) -> FieldSample<Scalar> {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, SphereParams>) return sphere_field(p, x);
          else if constexpr (std::is_same_v<P, TorusParams>) return torus_field(p, x);
          else if constexpr (std::is_same_v<P, EllipsoidParams>) return ellipsoid_field(p, x);
          else return metaball_field(p, x);
        },
        state_->params);
  }

  /// Whether x lies inside the bounding box scaled by 2 about its center.
  bool in_domain(const Vector3d& x) const;

  /// Surface points produced at construction; starting points for projection.
  std::span<const Vector3d> seeds() const { return state_->seeds; }

  /// Human-readable parameter summary, e.g. "torus(R=2, r=1)".
  std::string describe() const;

 private:
  struct State {
    SurfaceKind kind;
    SurfaceParams params;
    Box3d box;
    double diagonal;
    std::vector<Vector3d> seeds;
  };
  explicit ImplicitSurface(std::shared_ptr<const State> s) : state_(std::move(s)) {}
  static ImplicitSurface build(SurfaceKind kind, SurfaceParams params, Box3d box);

  std::shared_ptr<const State> state_;
};

/// F, grad F and Hess F at x. Throws DomainError outside twice the bounding
/// box or where the field is singular (torus axis), or on non-finite output.
FieldSample<double> evaluate_field(const ImplicitSurface& surface, const Vector3d& x);

/// Inward unit normal -grad F / |grad F| at an on-surface point.
Vector3d inward_normal(const ImplicitSurface& surface, const Vector3d& p);

struct PrincipalCurvatures {
  double k1;  ///< larger, w.r.t. the inward normal
  double k2;
  double max_abs() const { return std::max(std::abs(k1), std::abs(k2)); }
};

/// Principal curvatures of the level set of F through p, measured against
/// the inward normal (positive for a sphere).
PrincipalCurvatures principal_curvatures(const ImplicitSurface& surface, const Vector3d& p);

/// Walk from x along the gradient until F vanishes (Newton on the ray).
/// Returns false when the walk stalls, leaves the domain, or does not
/// converge within max_iterations.
bool walk_to_surface(const ImplicitSurface& surface, Vector3d& x, int max_iterations = 60);

/// A point of the surface with its inward normal and local feature size.
struct SurfacePoint {
  Vector3d position;
  Vector3d normal;
  double lfs = 0.0;
};

}  // namespace lfslab
