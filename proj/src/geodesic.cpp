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
#include <lfslab/geodesic.hpp>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <ostream>

namespace lfslab {

namespace {

constexpr std::size_t kInitialSegments = 16;
constexpr std::size_t kMaxSegments = 4096;
constexpr int kMaxShorteningSteps = 100;
constexpr int kWalkSubsteps = 256;

double polyline_length(const std::vector<Vector3d>& v) {
  double total = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) total += (v[i] - v[i - 1]).norm();
  return total;
}

/// Reprojects x onto the patch's level set, warm-starting from `foot`.
/// Updates `foot` in place.
Vector3d reproject(const OffsetPatch& patch, const Vector3d& x, Vector3d& foot) {
  foot = project_from(patch.surface(), x, foot).foot;
  return level_set_point(patch, foot);
}

/// Shortening steps at fixed vertex count until vertices stop moving.
void shorten(const OffsetPatch& patch, std::vector<Vector3d>& verts, std::vector<Vector3d>& feet) {
  const std::size_t n = verts.size();
  if (n < 3) return;
  const std::size_t m = n - 2;
  const double tol = 1e-10 * patch.surface().diagonal();
  using Basis = Eigen::Matrix<double, 3, 2>;
  std::vector<Basis> basis(n);

  for (int step = 0; step < kMaxShorteningSteps; ++step) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const auto [t1, t2] = tangent_basis(inward_normal(patch.surface(), feet[i]));
      basis[i] << t1, t2;
    }
    // Minimize sum |(v_{i+1} + B_{i+1} a_{i+1}) - (v_i + B_i a_i)|^2 over
    // tangential displacements a_i, endpoints fixed.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(12 * m);
    Eigen::VectorXd rhs(2 * m);
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      triplets.emplace_back(2 * k, 2 * k, 2.0);
      triplets.emplace_back(2 * k + 1, 2 * k + 1, 2.0);
      if (k > 0) {
        const Eigen::Matrix2d coupling = -basis[i].transpose() * basis[i - 1];
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) {
            triplets.emplace_back(2 * k + r, 2 * (k - 1) + c, coupling(r, c));
            triplets.emplace_back(2 * (k - 1) + c, 2 * k + r, coupling(r, c));
          }
      }
      rhs.segment<2>(2 * k) = -basis[i].transpose() * (2.0 * verts[i] - verts[i - 1] - verts[i + 1]);
    }
    Eigen::SparseMatrix<double> system(2 * m, 2 * m);
    system.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(system);
    if (solver.info() != Eigen::Success)
      throw ConvergenceError("trace_geodesic: shortening system is singular");
    const Eigen::VectorXd a = solver.solve(rhs);

    double max_move = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const std::size_t i = k + 1;
      const Vector3d moved = reproject(patch, verts[i] + basis[i] * a.segment<2>(2 * k), feet[i]);
      max_move = std::max(max_move, (moved - verts[i]).norm());
      verts[i] = moved;
    }
    if (max_move < tol) return;
  }
  throw ConvergenceError("trace_geodesic: curve shortening did not converge");
}

void refine(const OffsetPatch& patch, std::vector<Vector3d>& verts, std::vector<Vector3d>& feet) {
  std::vector<Vector3d> v2, f2;
  v2.reserve(2 * verts.size() - 1);
  f2.reserve(2 * verts.size() - 1);
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
    v2.push_back(verts[i]);
    f2.push_back(feet[i]);
    Vector3d foot = feet[i];
    v2.push_back(reproject(patch, 0.5 * (verts[i] + verts[i + 1]), foot));
    f2.push_back(foot);
  }
  v2.push_back(verts.back());
  f2.push_back(feet.back());
  verts = std::move(v2);
  feet = std::move(f2);
}

}  // namespace

OffsetPatch make_patch(const FeatureSize& lfs, const Vector3d& p) {
  const auto proj = project(lfs.surface(), p);
  OffsetPatch patch{lfs, proj.distance, p, proj.foot, proj.side, false};
  if (patch.side == Side::OnSurface) patch.omega = 0.0;
  patch.valid = patch.omega < lfs(proj.foot);
  return patch;
}

double offset_kappa_max(const ImplicitSurface& surface, const Vector3d& foot, double omega,
                        Side side) {
  const auto k = principal_curvatures(surface, foot);
  const double d = side == Side::Inside ? omega : (side == Side::Outside ? -omega : 0.0);
  return std::max(std::abs(k.k1 / (1.0 - d * k.k1)), std::abs(k.k2 / (1.0 - d * k.k2)));
}

GeodesicPath trace_geodesic(const OffsetPatch& patch, const Vector3d& start, const Vector3d& end) {
  if (!patch.valid) throw InvalidPatchError("trace_geodesic: patch has omega >= f(foot)");
  const ImplicitSurface& surface = patch.surface();
  const double level_tol = 1e-8 * surface.diagonal();

  auto on_level = [&](const Vector3d& x, const char* which) {
    const auto proj = project(surface, x);
    if (std::abs(proj.distance - patch.omega) > level_tol)
      throw DomainError(std::string("trace_geodesic: ") + which + " is not on the level set");
    return proj.foot;
  };
  const Vector3d start_foot = on_level(start, "start");
  const double chord = (end - start).norm();

  GeodesicPath path(patch);
  if (chord == 0.0) {
    path.vertices = {start};
    path.feet = {start_foot};
    path.kappa = {offset_kappa_max(surface, start_foot, patch.omega, patch.side)};
    path.kappa_max = path.kappa.front();
    path.argmax_point = start;
    path.r_m = 1.0 / path.kappa_max;
    return path;
  }
  const Vector3d end_foot = on_level(end, "end");
  if (chord > kGeodesicLocality * patch.lfs(start_foot))
    throw DomainError("trace_geodesic: chord exceeds the locality limit 0.25 f(start foot)");

  std::vector<Vector3d> verts(kInitialSegments + 1), feet(kInitialSegments + 1);
  verts.front() = start;
  verts.back() = end;
  feet.front() = start_foot;
  feet.back() = end_foot;
  for (std::size_t i = 1; i < kInitialSegments; ++i) {
    const double s = static_cast<double>(i) / kInitialSegments;
    feet[i] = (1.0 - s) * start_foot + s * end_foot;
    verts[i] = reproject(patch, (1.0 - s) * start + s * end, feet[i]);
  }
  shorten(patch, verts, feet);
  double coarse = polyline_length(verts);
  double fine = coarse;
  for (;;) {
    if (verts.size() - 1 >= kMaxSegments)
      throw ConvergenceError("trace_geodesic: length did not converge under refinement");
    refine(patch, verts, feet);
    shorten(patch, verts, feet);
    fine = polyline_length(verts);
    if (std::abs(fine - coarse) < 1e-6 * fine) break;
    coarse = fine;
  }

  path.vertices = std::move(verts);
  path.feet = std::move(feet);
  path.polyline_length = fine;
  // Polyline length error is O(h^2); one Richardson step removes that term.
  path.length = std::max(fine + (fine - coarse) / 3.0, fine);
  path.kappa.resize(path.vertices.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    path.kappa[i] = offset_kappa_max(surface, path.feet[i], patch.omega, patch.side);
    if (path.kappa[i] > path.kappa[arg]) arg = i;
  }
  path.kappa_max = path.kappa[arg];
  path.argmax_point = path.vertices[arg];
  path.r_m = 1.0 / path.kappa_max;
  return path;
}

Vector3d walk_level_set(const OffsetPatch& patch, const Vector3d& start, const Vector3d& direction,
                        double delta) {
  const ImplicitSurface& surface = patch.surface();
  Vector3d foot = project(surface, start).foot;
  Vector3d n = inward_normal(surface, foot);
  Vector3d d = direction - direction.dot(n) * n;
  if (d.norm() < 1e-12) throw DomainError("walk_level_set: direction is normal to the level set");
  d.normalize();
  const double h = delta / kWalkSubsteps;
  Vector3d x = start;
  for (int k = 0; k < kWalkSubsteps; ++k) {
    const Vector3d next = reproject(patch, x + h * d, foot);
    n = inward_normal(surface, foot);
    const Vector3d step = next - x;
    d = (step - step.dot(n) * n).normalized();
    x = next;
  }
  return x;
}

std::vector<std::pair<double, double>> prop1_ratio(const OffsetPatch& patch,
                                                   const Vector3d& start,
                                                   const Vector3d& direction,
                                                   const std::vector<double>& scales) {
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (!(scales[i] > 0.0) || (i > 0 && !(scales[i] < scales[i - 1])))
      throw DomainError("prop1_ratio: scales must be positive and strictly decreasing");
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(scales.size());
  for (double delta : scales) {
    const Vector3d end = walk_level_set(patch, start, direction, delta);
    const auto path = trace_geodesic(patch, start, end);
    out.emplace_back(delta, path.length / (end - start).norm());
  }
  return out;
}

Prop2Check prop2_check(const GeodesicPath& path) {
  if (path.vertices.size() < 2) return {0.0, 0.0};
  const ImplicitSurface& surface = path.patch.surface();
  const double angle = angle_between(inward_normal(surface, path.feet.front()),
                                     inward_normal(surface, path.feet.back()));
  return {angle, path.kappa_max * path.length};
}

void write_path_csv(std::ostream& out, const GeodesicPath& path) {
  const auto old_precision = out.precision(17);
  out << "t,x,y,z,h,kappa\n";
  double t = 0.0;
  for (std::size_t i = 0; i < path.vertices.size(); ++i) {
    if (i > 0) t += (path.vertices[i] - path.vertices[i - 1]).norm();
    const Vector3d& v = path.vertices[i];
    out << t << ',' << v.x() << ',' << v.y() << ',' << v.z() << ','
        << (v - path.feet[i]).norm() << ',' << path.kappa[i] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace lfslab
