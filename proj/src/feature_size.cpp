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
#include <lfslab/runtime.hpp>

#include "kdtree.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <ostream>
#include <random>

namespace lfslab {

std::string_view to_string(LfsMode mode) {
  return mode == LfsMode::Analytic ? "analytic" : "numeric";
}

LfsMode lfs_mode_from_string(std::string_view text) {
  if (text == "analytic") return LfsMode::Analytic;
  if (text == "numeric") return LfsMode::Numeric;
  throw ConfigError("lfs_mode: expected 'analytic' or 'numeric', got '" + std::string(text) + "'");
}

bool has_analytic_medial_axis(const ImplicitSurface& surface) {
  return surface.kind() == SurfaceKind::Sphere || surface.kind() == SurfaceKind::Torus;
}

struct FeatureSize::State {
  ImplicitSurface surface;
  LfsMode mode;
  std::vector<MedialEstimate> cloud;
  detail::KdTree centers;
  detail::KdTree focal;
  double resolution = 0.0;
};

namespace {

constexpr int kShrinkIterations = 60;

std::optional<MedialEstimate> shrink_ball(const ImplicitSurface& surface,
                                          const detail::KdTree& dense, const Vector3d& contact,
                                          const Vector3d& direction, Side side) {
  const double diagonal = surface.diagonal();
  const double exclude2 = std::pow(1e-6 * diagonal, 2);
  auto near_contact = [&](std::size_t i) {
    return (dense.point(i) - contact).squaredNorm() <= exclude2;
  };
  // Ball tangent to the surface at the contact and passing through s.
  auto through = [&](const Vector3d& s) {
    const Vector3d d = s - contact;
    const double denom = 2.0 * d.dot(direction);
    return denom > 0.0 ? d.squaredNorm() / denom : std::numeric_limits<double>::quiet_NaN();
  };

  double radius = diagonal;
  bool settled = false;
  for (int it = 0; it < kShrinkIterations && !settled; ++it) {
    const auto hit = dense.nearest(contact + radius * direction, near_contact);
    if (hit.distance >= radius * (1.0 - 1e-12)) {
      if (radius >= diagonal * (1.0 - 1e-12)) return std::nullopt;
      break;
    }
    const double next = through(dense.point(hit.index));
    if (!(next > 0.0)) return std::nullopt;
    settled = std::abs(next - radius) < 1e-12 * radius;
    radius = next;
  }

  // Polish against the continuous surface: the sample converged ball may
  // still poke through between samples.
  for (int it = 0; it < kShrinkIterations; ++it) {
    const Vector3d center = contact + radius * direction;
    if (!surface.in_domain(center)) return std::nullopt;
    Vector3d s = contact;
    double dist = radius;
    auto try_start = [&](const Vector3d& start) {
      if ((start - center).norm() < dist) s = start, dist = (start - center).norm();
      // Near a focal point the local solve may stall; its last iterate still counts.
      if (const auto local = try_project_from(surface, center, start); local && local->distance < dist)
        s = local->foot, dist = local->distance;
    };
    // Starts near the contact can slide onto it, a saddle of the distance
    // when the ball is nearly osculating. Balls touching along a circle need
    // starts from the far hemisphere.
    const double keep_out2 = std::pow(0.25 * radius, 2);
    std::vector<std::size_t> used;
    auto seen = [&](std::size_t i) { return std::find(used.begin(), used.end(), i) != used.end(); };
    auto off_contact = [&](std::size_t i) {
      return seen(i) || (dense.point(i) - contact).squaredNorm() <= keep_out2;
    };
    auto far_side = [&](std::size_t i) {
      return seen(i) || (dense.point(i) - contact).dot(direction) < radius;
    };
    for (int k = 0; k < 5; ++k) {
      const auto hit = k < 2 ? dense.nearest(center, off_contact) : dense.nearest(center, far_side);
      if (hit.index >= dense.size()) continue;
      used.push_back(hit.index);
      try_start(dense.point(hit.index));
    }
    Vector3d mirror = 2.0 * center - contact;
    if (surface.in_domain(mirror) && walk_to_surface(surface, mirror)) try_start(mirror);
    if (dist >= radius * (1.0 - 1e-10)) break;
    const double next = through(s);
    if (!(next > 0.0) || next >= radius) break;
    radius = next;
  }
  const Vector3d center = contact + radius * direction;
  if (!surface.in_domain(center)) return std::nullopt;
  return MedialEstimate{contact, center, radius, side, LfsMode::Numeric};
}

double analytic_lfs(const ImplicitSurface& surface, const Vector3d& x) {
  if (const auto* s = std::get_if<SphereParams>(&surface.params())) return (x - s->center).norm();
  const auto& t = std::get<TorusParams>(surface.params());
  const double rho = std::hypot(x.x(), x.y());
  return std::min(std::hypot(rho - t.major, x.z()), rho);
}

}  // namespace

std::vector<Vector3d> surface_sample(const ImplicitSurface& surface, std::size_t count,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Box3d& box = surface.bounding_box();
  std::uniform_real_distribution<double> ux(box.min().x(), box.max().x());
  std::uniform_real_distribution<double> uy(box.min().y(), box.max().y());
  std::uniform_real_distribution<double> uz(box.min().z(), box.max().z());
  const unsigned workers = worker_count();

  std::vector<Vector3d> out;
  out.reserve(count);
  while (out.size() < count) {
    const std::size_t batch = std::max<std::size_t>(64, count - out.size() + (count - out.size()) / 8);
    std::vector<Vector3d> draws(batch);
    for (auto& d : draws) d = Vector3d(ux(rng), uy(rng), uz(rng));
    std::vector<std::optional<Vector3d>> feet(batch);
    detail::parallel_for(batch, workers, [&](std::size_t i) {
      try {
        feet[i] = project(surface, draws[i]).foot;
      } catch (const Error&) {
      }
    });
    for (const auto& f : feet) {
      if (f && out.size() < count) out.push_back(*f);
    }
  }
  return out;
}

namespace {

std::vector<MedialEstimate> sample_medial(const ImplicitSurface& surface, std::size_t n_contacts,
                                          std::uint64_t seed, std::size_t dense_samples,
                                          std::vector<Vector3d>* dense_out) {
  if (n_contacts < 100)
    throw InsufficientSamplingError("medial_sample: need at least 100 contacts, got " +
                                    std::to_string(n_contacts));
  if (dense_samples < 10000)
    throw InsufficientSamplingError("medial_sample: dense surface sample must have >= 10^4 points");

  // Independent streams for the dense sample and the contacts.
  std::seed_seq dense_seq{seed, std::uint64_t{0x64656e7365}};
  std::seed_seq contact_seq{seed, std::uint64_t{0x636f6e74}};
  std::mt19937_64 mix_dense(dense_seq), mix_contact(contact_seq);
  auto dense_points = surface_sample(surface, dense_samples, mix_dense());
  const detail::KdTree dense(dense_points);
  const auto contacts = surface_sample(surface, n_contacts, mix_contact());

  std::vector<std::array<std::optional<MedialEstimate>, 2>> balls(contacts.size());
  detail::parallel_for(contacts.size(), worker_count(), [&](std::size_t i) {
    const Vector3d n = inward_normal(surface, contacts[i]);
    balls[i][0] = shrink_ball(surface, dense, contacts[i], n, Side::Inside);
    balls[i][1] = shrink_ball(surface, dense, contacts[i], -n, Side::Outside);
  });
  std::vector<MedialEstimate> cloud;
  for (const auto& pair : balls)
    for (const auto& b : pair)
      if (b) cloud.push_back(*b);
  if (dense_out) *dense_out = std::move(dense_points);
  return cloud;
}

// Centers of the tightest curvature circle at each point. f(p) <= 1/kappa(p)
// holds on the surface, so these keep the estimate honest near ridges that
// the medial cloud resolves poorly.
std::vector<Vector3d> focal_points(const ImplicitSurface& surface,
                                   const std::vector<Vector3d>& points) {
  std::vector<Vector3d> out(points.size());
  detail::parallel_for(points.size(), worker_count(), [&](std::size_t i) {
    const auto k = principal_curvatures(surface, points[i]);
    const Vector3d n = inward_normal(surface, points[i]);
    out[i] = k.k1 >= -k.k2 ? Vector3d(points[i] + n / k.k1) : Vector3d(points[i] + n / k.k2);
  });
  std::erase_if(out, [](const Vector3d& c) { return !c.allFinite(); });
  return out;
}

FeatureSize::State numeric_state(const ImplicitSurface& surface,
                                 std::vector<MedialEstimate> cloud,
                                 const std::vector<Vector3d>& surface_points) {
  if (cloud.size() < 100)
    throw InsufficientSamplingError("lfs: medial cloud has " + std::to_string(cloud.size()) +
                                    " points, need at least 100");
  std::vector<Vector3d> centers;
  centers.reserve(cloud.size());
  for (const auto& m : cloud) centers.push_back(m.center);
  detail::KdTree tree(centers);
  double resolution = 0.0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto hit = tree.nearest(centers[i], [i](std::size_t j) { return j == i; });
    resolution = std::max(resolution, hit.distance);
  }
  return FeatureSize::State{surface, LfsMode::Numeric, std::move(cloud), std::move(tree),
                            detail::KdTree(focal_points(surface, surface_points)), resolution};
}

}  // namespace

std::vector<MedialEstimate> medial_sample(const ImplicitSurface& surface,
                                          std::size_t n_contacts, std::uint64_t seed,
                                          std::size_t dense_samples) {
  return sample_medial(surface, n_contacts, seed, dense_samples, nullptr);
}

FeatureSize FeatureSize::analytic(const ImplicitSurface& surface) {
  if (!has_analytic_medial_axis(surface))
    throw ConfigError("lfs: no analytic medial axis for " + std::string(surface.name()) +
                      "; use numeric mode");
  return FeatureSize(std::make_shared<State>(State{surface, LfsMode::Analytic, {}, {}, {}, 0.0}));
}

FeatureSize FeatureSize::numeric(const ImplicitSurface& surface, std::size_t n_contacts,
                                 std::uint64_t seed) {
  std::vector<Vector3d> dense;
  auto cloud = sample_medial(surface, n_contacts, seed, 30000, &dense);
  return FeatureSize(std::make_shared<State>(numeric_state(surface, std::move(cloud), dense)));
}

FeatureSize FeatureSize::from_cloud(const ImplicitSurface& surface,
                                    std::vector<MedialEstimate> cloud) {
  std::vector<Vector3d> contacts;
  for (const auto& m : cloud) contacts.push_back(m.contact);
  return FeatureSize(
      std::make_shared<State>(numeric_state(surface, std::move(cloud), contacts)));
}

const ImplicitSurface& FeatureSize::surface() const { return state_->surface; }
LfsMode FeatureSize::mode() const { return state_->mode; }
std::span<const MedialEstimate> FeatureSize::medial_cloud() const { return state_->cloud; }
double FeatureSize::resolution() const { return state_->resolution; }

double FeatureSize::unscaled(const Vector3d& x) const {
  if (state_->mode == LfsMode::Analytic) return analytic_lfs(state_->surface, x);
  const double medial = state_->centers.nearest(x).distance;
  return state_->focal.size() ? std::min(medial, state_->focal.nearest(x).distance) : medial;
}

double FeatureSize::operator()(const Vector3d& x) const {
  const double raw = unscaled(x);
  return state_->mode == LfsMode::Analytic ? raw : kSafetyFactor * raw;
}

double lipschitz_residual(const FeatureSize& model, const Vector3d& x, const Vector3d& y) {
  return std::max(0.0, std::abs(model(x) - model(y)) - (x - y).norm());
}

SurfacePoint make_surface_point(const FeatureSize& model, const Vector3d& p) {
  const ImplicitSurface& surface = model.surface();
  if (std::abs(evaluate_field(surface, p).value) > surface.on_surface_tol())
    throw DomainError("surface point: |F(p)| exceeds the on-surface tolerance");
  return {p, inward_normal(surface, p), model(p)};
}

void write_medial_csv(std::ostream& out, std::span<const MedialEstimate> cloud) {
  const auto old_precision = out.precision(17);
  out << "x,y,z,radius,side\n";
  for (const auto& m : cloud)
    out << m.center.x() << ',' << m.center.y() << ',' << m.center.z() << ',' << m.radius << ','
        << to_string(m.side) << '\n';
  out.precision(old_precision);
}

}  // namespace lfslab
