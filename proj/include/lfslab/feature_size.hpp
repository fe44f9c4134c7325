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

#include <lfslab/projection.hpp>
#include <lfslab/surface.hpp>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace lfslab {

enum class LfsMode { Analytic, Numeric };

std::string_view to_string(LfsMode mode);
LfsMode lfs_mode_from_string(std::string_view text);

/// Whether a catalog surface has a closed-form medial axis (sphere, torus).
bool has_analytic_medial_axis(const ImplicitSurface& surface);

/// A maximal empty ball touching the surface at `contact`; its center is a
/// sample of the medial axis.
struct MedialEstimate {
  Vector3d contact;
  Vector3d center;
  double radius = 0.0;
  Side side = Side::Inside;
  LfsMode method = LfsMode::Numeric;
};

/// Uniform-in-box points projected onto the surface, deterministic in seed.
/// Medial-ambiguous draws are skipped.
std::vector<Vector3d> surface_sample(const ImplicitSurface& surface, std::size_t count,
                                     std::uint64_t seed);

/// Shrinking-ball medial estimates: for each of n_contacts sampled contacts,
/// one ball per side of the surface, unless that ball escapes the bounding
/// box. Balls are empty with respect to a dense projected surface sample of
/// `dense_samples` points. Requires n_contacts >= 100.
std::vector<MedialEstimate> medial_sample(const ImplicitSurface& surface,
                                          std::size_t n_contacts, std::uint64_t seed,
                                          std::size_t dense_samples = 30000);

/// Local feature size f(x) = d(x, M), defined on all of R^3.
///
/// Analytic mode uses the exact medial axis of the sphere (its center) and
/// of the torus (core circle and symmetry axis). Numeric mode measures the
/// distance to a shrinking-ball medial cloud and scales it by a safety
/// factor, since distance to a subset of M can only over-estimate f.
class FeatureSize {
 public:
  static constexpr double kSafetyFactor = 0.97;

  static FeatureSize analytic(const ImplicitSurface& surface);
  static FeatureSize numeric(const ImplicitSurface& surface, std::size_t n_contacts = 500,
                             std::uint64_t seed = 0);
  /// Build a numeric model around an existing medial cloud.
  static FeatureSize from_cloud(const ImplicitSurface& surface, std::vector<MedialEstimate> cloud);

  const ImplicitSurface& surface() const;
  LfsMode mode() const;

  /// f(x). Numeric mode includes the safety factor.
  double operator()(const Vector3d& x) const;
  /// f(x) without the numeric safety factor (identical in analytic mode).
  double unscaled(const Vector3d& x) const;

  std::span<const MedialEstimate> medial_cloud() const;
  /// Largest nearest-neighbour spacing within the medial cloud; 0 in
  /// analytic mode.
  double resolution() const;

 struct State;

 private:
  explicit FeatureSize(std::shared_ptr<const State> s) : state_(std::move(s)) {}
  std::shared_ptr<const State> state_;
};

inline double lfs(const FeatureSize& model, const Vector3d& x) { return model(x); }

/// max(0, |f(x) - f(y)| - |x - y|).
double lipschitz_residual(const FeatureSize& model, const Vector3d& x, const Vector3d& y);

/// On-surface point with inward normal and feature size. Throws DomainError
/// when |F(p)| exceeds the on-surface tolerance.
SurfacePoint make_surface_point(const FeatureSize& model, const Vector3d& p);

/// CSV with header x,y,z,radius,side.
void write_medial_csv(std::ostream& out, std::span<const MedialEstimate> cloud);

}  // namespace lfslab
