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

#include <lfslab/surface.hpp>

#include <optional>

namespace lfslab {

class FeatureSize;

enum class Side { Inside, Outside, OnSurface };

std::string_view to_string(Side side);

/// Closest point x~ of x on the surface together with h(x) = |x - x~|.
struct ProjectionResult {
  Vector3d foot;
  double distance = 0.0;
  Side side = Side::OnSurface;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Global nearest-point projection.
///
/// Damped Newton on the Lagrange conditions y - x + lambda grad F(y) = 0,
/// F(y) = 0, started from the eight seed-cloud points nearest to x and from
/// the gradient walk of x itself. The closest converged foot wins. When two
/// starts reach feet at (numerically) the same distance but at different
/// positions, x is treated as lying on the medial axis and
/// MedialAmbiguityError is thrown.
ProjectionResult project(const ImplicitSurface& surface, const Vector3d& x);

/// Single-start local projection from a known nearby foot. No ambiguity
/// detection; intended for warm-started reprojection along short paths.
/// Throws ConvergenceError when the Newton iteration fails.
ProjectionResult project_from(const ImplicitSurface& surface, const Vector3d& x,
                              const Vector3d& start);

/// Like project_from, but a stalled iteration still yields its last
/// on-surface iterate with converged = false. Returns nullopt only when no
/// usable iterate exists.
std::optional<ProjectionResult> try_project_from(const ImplicitSurface& surface,
                                                 const Vector3d& x, const Vector3d& start);

/// h(x), the unsigned distance to the surface.
inline double distance_to_surface(const ImplicitSurface& surface, const Vector3d& x) {
  return project(surface, x).distance;
}

/// n_x := inward normal at the foot of x. Defined off the medial axis.
Vector3d extended_normal(const ImplicitSurface& surface, const Vector3d& x);

/// Point at distance omega from the surface along the normal line through
/// `foot`, on the given side. OnSurface returns the foot itself.
Vector3d offset_point(const ImplicitSurface& surface, const Vector3d& foot, double omega,
                      Side side);

/// Finite-difference step used for gradients of h.
inline double distance_fd_step(const ImplicitSurface& surface) {
  return 1e-6 * surface.diagonal();
}

/// |g - (x - x~)/h(x)| with g the normalized central-difference gradient of
/// h at x. Requires 0 < h(x) < f(x~), with the difference stencil kept on
/// the same side of the surface and away from the medial axis; otherwise
/// DomainError.
double gradient_identity_residual(const ImplicitSurface& surface, const FeatureSize& lfs,
                                  const Vector3d& x);

}  // namespace lfslab
