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

#include <lfslab/feature_size.hpp>
#include <lfslab/projection.hpp>

#include <iosfwd>
#include <utility>
#include <vector>

namespace lfslab {

/// Local piece of the offset surface h^{-1}(omega) around `anchor`.
///
/// For omega > 0 the level set has a sheet on each side of the surface; the
/// patch lives on the anchor's side.
struct OffsetPatch {
  FeatureSize lfs;
  double omega = 0.0;
  Vector3d anchor;
  Vector3d anchor_foot;
  Side side = Side::OnSurface;
  bool valid = false;  ///< omega < f(anchor foot)

  const ImplicitSurface& surface() const { return lfs.surface(); }
};

/// Patch through p with omega = h(p). Throws MedialAmbiguityError when p is
/// on the medial axis; a patch with omega >= f(p~) is returned with
/// valid = false.
OffsetPatch make_patch(const FeatureSize& lfs, const Vector3d& p);

/// Point of the patch's level set on the normal line of `foot`.
inline Vector3d level_set_point(const OffsetPatch& patch, const Vector3d& foot) {
  return offset_point(patch.surface(), foot, patch.omega, patch.side);
}

/// Largest principal-curvature magnitude of the level set h = omega at the
/// point over `foot` on the given side (parallel-surface formula
/// k / (1 - d k) with d the signed inward offset).
double offset_kappa_max(const ImplicitSurface& surface, const Vector3d& foot, double omega,
                        Side side);

/// Discrete geodesic on an offset patch.
struct GeodesicPath {
  explicit GeodesicPath(OffsetPatch p) : patch(std::move(p)) {}

  OffsetPatch patch;
  std::vector<Vector3d> vertices;
  std::vector<Vector3d> feet;      ///< closest surface point of each vertex
  std::vector<double> kappa;       ///< offset kappa_max at each vertex
  double length = 0.0;             ///< d_sigma(start, end)
  double polyline_length = 0.0;    ///< length of `vertices` as drawn
  double kappa_max = 0.0;
  Vector3d argmax_point;           ///< m
  double r_m = std::numeric_limits<double>::infinity();  ///< 1 / kappa_max

  const Vector3d& start() const { return vertices.front(); }
  const Vector3d& end() const { return vertices.back(); }
};

/// Largest chord, relative to f at the start's foot, that trace_geodesic
/// accepts.
inline constexpr double kGeodesicLocality = 0.25;

/// Shortest path between two points of the patch's level set.
///
/// The chord is reprojected onto the level set and shortened by repeated
/// global linearized shortening steps (tangential displacements minimizing
/// the discrete path energy) followed by reprojection. The vertex count
/// starts at 17 and doubles until the polyline length changes by less than
/// 1e-6 relative; `length` is the Richardson extrapolation of the last two
/// levels.
GeodesicPath trace_geodesic(const OffsetPatch& patch, const Vector3d& start, const Vector3d& end);

/// End point reached by walking arc length delta from start along
/// `direction`, transporting the direction along the level set.
Vector3d walk_level_set(const OffsetPatch& patch, const Vector3d& start, const Vector3d& direction,
                        double delta);

/// Geodesic-to-chord ratio d_F / d for each scale; scales must be strictly
/// decreasing and positive.
std::vector<std::pair<double, double>> prop1_ratio(const OffsetPatch& patch,
                                                   const Vector3d& start,
                                                   const Vector3d& direction,
                                                   const std::vector<double>& scales);

struct Prop2Check {
  double angle = 0.0;  ///< angle between extended normals at the path ends
  double bound = 0.0;  ///< kappa_max * length
};

Prop2Check prop2_check(const GeodesicPath& path);

/// CSV with header t,x,y,z,h,kappa (t = cumulative arc length).
void write_path_csv(std::ostream& out, const GeodesicPath& path);

}  // namespace lfslab
