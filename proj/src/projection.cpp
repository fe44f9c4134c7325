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
#include <lfslab/feature_size.hpp>
#include <lfslab/projection.hpp>

#include <Eigen/LU>

#include <optional>

namespace lfslab {

std::string_view to_string(Side side) {
  switch (side) {
    case Side::Inside: return "inside";
    case Side::Outside: return "outside";
    case Side::OnSurface: return "on_surface";
  }
  return "unknown";
}

namespace {

constexpr int kMaxIterations = 100;
constexpr std::size_t kSeedStarts = 8;

struct Residual {
  double tangential;
  double normal;
  double value() const { return std::max(tangential, normal); }
};

Residual kkt_residual(const FieldSample<double>& s, const Vector3d& y, const Vector3d& x) {
  const double g = s.gradient.norm();
  const Vector3d n = s.gradient / g;
  const Vector3d d = x - y;
  return {(d - d.dot(n) * n).norm(), std::abs(s.value) / g};
}

/// One local Newton solve. Returns nullopt when it fails to converge, unless
/// `partial` asks for the last on-surface iterate instead.
std::optional<ProjectionResult> solve_local(const ImplicitSurface& surface, const Vector3d& x,
                                            const Vector3d& start, bool partial = false) {
  const double target = 1e-12 * surface.diagonal();
  Vector3d y = start;
  FieldSample<double> s;
  try {
    s = evaluate_field(surface, y);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  if (s.gradient.squaredNorm() < 1e-16) return std::nullopt;
  double lambda = (x - y).dot(s.gradient) / s.gradient.squaredNorm();

  auto merit = [&](const FieldSample<double>& f, const Vector3d& p, double l) {
    return (p - x + l * f.gradient).norm() + std::abs(f.value) / f.gradient.norm();
  };

  Residual res = kkt_residual(s, y, x);
  int it = 0;
  bool converged = res.value() <= target;
  bool polished = false;
  for (; it < kMaxIterations && !(converged && polished); ++it) {
    if (converged) polished = true;
    Eigen::Matrix4d jac;
    jac.topLeftCorner<3, 3>() = Matrix3d::Identity() + lambda * s.hessian;
    jac.topRightCorner<3, 1>() = s.gradient;
    jac.bottomLeftCorner<1, 3>() = s.gradient.transpose();
    jac(3, 3) = 0.0;
    Eigen::Vector4d rhs;
    rhs.head<3>() = -(y - x + lambda * s.gradient);
    rhs(3) = -s.value;

    Eigen::FullPivLU<Eigen::Matrix4d> lu(jac);
    Eigen::Vector4d step;
    if (lu.isInvertible()) {
      step = lu.solve(rhs);
    } else {
      // Singular KKT matrix (focal point): fall back to a tangential
      // correction plus a gradient step back onto the surface.
      const double g2 = s.gradient.squaredNorm();
      const Vector3d n = s.gradient / std::sqrt(g2);
      const Vector3d d = x - y;
      step.head<3>() = d - d.dot(n) * n - s.value * s.gradient / g2;
      step(3) = 0.0;
    }
    // Backtracking on the merit function keeps far-from-solution starts stable.
    const double m0 = merit(s, y, lambda);
    double alpha = 1.0;
    Vector3d y_next;
    double lambda_next = lambda;
    FieldSample<double> s_next;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      y_next = y + alpha * step.head<3>();
      lambda_next = lambda + alpha * step(3);
      try {
        s_next = evaluate_field(surface, y_next);
      } catch (const DomainError&) {
        continue;
      }
      if (s_next.gradient.squaredNorm() < 1e-16) continue;
      if (merit(s_next, y_next, lambda_next) < m0 || (converged && ls == 0)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    y = y_next;
    s = s_next;
    // The multiplier is re-estimated from the new point rather than taken
    // from the Newton update; the line search still judges the full step.
    lambda = (x - y).dot(s.gradient) / s.gradient.squaredNorm();
    res = kkt_residual(s, y, x);
    converged = converged || res.value() <= target;
  }
  if (!converged) {
    if (!partial || !walk_to_surface(surface, y)) return std::nullopt;
    s = evaluate_field(surface, y);
    res = kkt_residual(s, y, x);
  }

  ProjectionResult out;
  out.foot = y;
  out.distance = (x - y).norm();
  out.iterations = it;
  out.residual = res.value();
  out.converged = converged;
  if (out.distance <= surface.on_surface_tol())
    out.side = Side::OnSurface;
  else
    out.side = (x - y).dot(s.gradient) > 0 ? Side::Outside : Side::Inside;
  return out;
}

}  // namespace

ProjectionResult project_from(const ImplicitSurface& surface, const Vector3d& x,
                              const Vector3d& start) {
  if (!x.allFinite() || !surface.in_domain(x))
    throw DomainError("project: point outside twice the bounding box");
  auto r = solve_local(surface, x, start);
  if (!r) throw ConvergenceError("project: local Newton projection did not converge");
  return *r;
}

ProjectionResult project(const ImplicitSurface& surface, const Vector3d& x) {
  if (!x.allFinite() || !surface.in_domain(x))
    throw DomainError("project: point outside twice the bounding box");

  std::vector<Vector3d> starts;
  const auto seeds = surface.seeds();
  std::vector<std::pair<double, std::size_t>> by_distance(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i)
    by_distance[i] = {(seeds[i] - x).squaredNorm(), i};
  const std::size_t k = std::min(kSeedStarts, by_distance.size());
  std::partial_sort(by_distance.begin(), by_distance.begin() + k, by_distance.end());
  for (std::size_t i = 0; i < k; ++i) starts.push_back(seeds[by_distance[i].second]);
  Vector3d walked = x;
  if (walk_to_surface(surface, walked)) starts.push_back(walked);

  std::vector<ProjectionResult> feet;
  for (const auto& start : starts)
    if (auto r = solve_local(surface, x, start)) feet.push_back(*r);
  if (feet.empty()) throw ConvergenceError("project: no start converged");

  const auto best = std::min_element(feet.begin(), feet.end(), [](const auto& a, const auto& b) {
    return a.distance < b.distance;
  });
  const double ambiguity_tol = 1e-6 * surface.diagonal();
  for (const auto& f : feet) {
    if (std::abs(f.distance - best->distance) <= ambiguity_tol &&
        (f.foot - best->foot).norm() > 100.0 * ambiguity_tol)
      throw MedialAmbiguityError("project: point is numerically on the medial axis");
  }
  // Focal points belong to the closure of the medial axis; with a continuum
  // of feet the starts may all land on the same one.
  if (best->side != Side::OnSurface) {
    const auto k = principal_curvatures(surface, best->foot);
    const double toward = best->side == Side::Inside ? k.k1 : -k.k2;
    if (toward > 0.0 && best->distance >= 1.0 / toward - ambiguity_tol)
      throw MedialAmbiguityError("project: point is numerically on the medial axis");
  }
  return *best;
}

std::optional<ProjectionResult> try_project_from(const ImplicitSurface& surface,
                                                const Vector3d& x, const Vector3d& start) {
  if (!x.allFinite() || !surface.in_domain(x)) return std::nullopt;
  return solve_local(surface, x, start, true);
}

Vector3d extended_normal(const ImplicitSurface& surface, const Vector3d& x) {
  return inward_normal(surface, project(surface, x).foot);
}

Vector3d offset_point(const ImplicitSurface& surface, const Vector3d& foot, double omega,
                      Side side) {
  if (side == Side::OnSurface || omega == 0.0) return foot;
  const Vector3d n = inward_normal(surface, foot);
  return side == Side::Inside ? Vector3d(foot + omega * n) : Vector3d(foot - omega * n);
}

double gradient_identity_residual(const ImplicitSurface& surface, const FeatureSize& lfs,
                                  const Vector3d& x) {
  const auto base = project(surface, x);
  const double h = base.distance;
  const double step = distance_fd_step(surface);
  const double f_foot = lfs(base.foot);
  if (!(h > 10.0 * step) || !(h + 10.0 * step < f_foot))
    throw DomainError("gradient_identity_residual: need 0 < h(x) < f(foot) with room for the "
                      "difference stencil");
  Vector3d numeric;
  for (int axis = 0; axis < 3; ++axis) {
    Vector3d e = Vector3d::Zero();
    e[axis] = step;
    numeric[axis] =
        (project(surface, x + e).distance - project(surface, x - e).distance) / (2.0 * step);
  }
  return (numeric.normalized() - (x - base.foot) / h).norm();
}

}  // namespace lfslab
