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

#include <iosfwd>
#include <utility>
#include <vector>

namespace lfslab {

/// eps / (1 - 3 eps), the older comparison bound; eps in [0, 1/3).
double bound_ab(double eps);
/// eps / (1 - eps); eps in [0, 1/3].
double bound_new(double eps);
/// -ln(1 - eps); eps in [0, 1/3].
double bound_log(double eps);

/// Largest epsilon admitted by the normal-variation theorem.
inline constexpr double kEpsMax = 1.0 / 3.0;

/// Angle tolerance for pass/fail verdicts: tighter when f is exact.
inline double angle_tolerance(const FeatureSize& model) {
  return model.mode() == LfsMode::Analytic ? 1e-9 : 1e-6;
}

/// Normal-variation verdict for one pair of surface points.
struct PairRecord {
  SurfacePoint q;
  SurfacePoint q2;
  double dist = 0.0;     ///< |q - q2|
  double eps_thm = 0.0;  ///< dist / f(q)
  double eps_ab = 0.0;   ///< dist / min(f(q), f(q2))
  double angle = 0.0;    ///< angle between n_q and n_q2, in [0, pi]
  double bound_ab = 0.0; ///< +inf when eps_ab >= 1/3
  double bound_new = 0.0;
  double bound_log = 0.0;
  bool pass_new = true;
  bool pass_log = true;
  double margin_log = 0.0;  ///< bound_log - angle
};

/// Throws RejectedPairError when dist / f(q) exceeds 1/3 and DomainError
/// when either point is off the surface.
PairRecord verify_pair(const FeatureSize& model, const Vector3d& q, const Vector3d& q2);

struct TraceSample {
  double t = 0.0;  ///< arc length from q
  Vector3d p;
  Vector3d foot;
  double omega = 0.0;       ///< h(p)
  double theta = 0.0;       ///< angle between n_q and n_p
  double theta_rate = 0.0;  ///< |d theta / dt|, finite differences
  double f_foot = 0.0;
  double omega_bound = 0.0;  ///< 2 eps / (1 - 2 eps) f(foot)
  double rate_bound = 0.0;   ///< 1 / ((1 - eps t/d) f(q))
  bool omega_ok = true;
  bool rate_ok = true;
};

/// theta(t) along the segment q q2 with the per-sample inequalities.
struct SegmentTrace {
  SurfacePoint q;
  SurfacePoint q2;
  double eps = 0.0;
  double angle = 0.0;  ///< direct angle between n_q and n_q2
  std::size_t steps = 0;
  std::vector<TraceSample> samples;
  double integrated_angle = 0.0;  ///< total variation of theta
  double integration_tol = 0.0;
  bool omega_ok = true;
  bool rate_ok = true;
  bool integration_ok = true;
  bool ok() const { return omega_ok && rate_ok && integration_ok; }
};

/// Samples t_i = i d / steps, i = 0..steps. Requires steps >= 100. Throws
/// RejectedPairError for eps > 1/3 and TraceError when a sample is on (or
/// within the guard band of) the medial axis.
SegmentTrace integrate_theta(const FeatureSize& model, const Vector3d& q, const Vector3d& q2,
                             std::size_t steps);

/// CSV of the trace samples.
void write_trace_csv(std::ostream& out, const SegmentTrace& trace);

/// For each dt: p' = p + dt direction, r = closest point to p' on the level
/// set h = h(p) through p; returns (dt, |p - r| / dt). dt values must be
/// strictly decreasing with the smallest above 1e3 machine epsilon times the
/// bounding-box diagonal.
std::vector<std::pair<double, double>> claim3_probe(const FeatureSize& model, const Vector3d& p,
                                                    const Vector3d& direction,
                                                    const std::vector<double>& deltas);

/// Point of the surface at chord distance `radius` from q in the direction
/// making angle `phi` in q's tangent plane (tangent frame from
/// tangent_basis). Solved by bisection in the normal plane; throws
/// ConvergenceError if no intersection is bracketed.
Vector3d chord_sphere_point(const ImplicitSurface& surface, const Vector3d& q, double phi,
                            double radius);

}  // namespace lfslab
