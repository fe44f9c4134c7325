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
#include <lfslab/surface.hpp>

#include <Eigen/Eigenvalues>

#include <charconv>
#include <numeric>
#include <sstream>

namespace lfslab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::DegenerateGradient: return "degenerate_gradient";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::MedialAmbiguity: return "medial_ambiguity";
    case ErrorKind::InsufficientSampling: return "insufficient_sampling";
    case ErrorKind::InvalidPatch: return "invalid_patch";
    case ErrorKind::RejectedPair: return "rejected_pair";
    case ErrorKind::Trace: return "trace";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

std::string_view to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::Sphere: return "sphere";
    case SurfaceKind::Torus: return "torus";
    case SurfaceKind::Ellipsoid: return "ellipsoid";
    case SurfaceKind::MetaballBlend: return "metaball_blend";
  }
  return "unknown";
}

namespace {

constexpr int kSeedGrid = 14;
constexpr double kMinGradient = 1e-8;
constexpr double kMetaballMinGradient = 1e-4;

Box3d padded(const Box3d& box, double fraction) {
  const Vector3d pad = Vector3d::Constant(fraction * box.diagonal().norm());
  return Box3d(box.min() - pad, box.max() + pad);
}

bool balls_connected(const std::vector<Metaball>& balls) {
  const std::size_t n = balls.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((balls[i].center - balls[j].center).norm() < balls[i].radius + balls[j].radius)
        parent[find(i)] = find(j);
  for (std::size_t i = 1; i < n; ++i)
    if (find(i) != find(0)) return false;
  return true;
}

double parse_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(last[-1]))) --last;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value))
    throw ConfigError("surface." + key + ": expected a finite number, got '" + text + "'");
  return value;
}

}  // namespace

ImplicitSurface ImplicitSurface::build(SurfaceKind kind, SurfaceParams params, Box3d box) {
  auto state = std::make_shared<State>();
  state->kind = kind;
  state->params = std::move(params);
  state->box = box;
  state->diagonal = box.diagonal().norm();

  ImplicitSurface surface(state);
  // Seed cloud: a grid over the slightly enlarged box, walked onto F = 0.
  const Box3d grid_box = padded(box, 0.1);
  const Vector3d step = grid_box.diagonal() / (kSeedGrid - 1);
  for (int i = 0; i < kSeedGrid; ++i)
    for (int j = 0; j < kSeedGrid; ++j)
      for (int k = 0; k < kSeedGrid; ++k) {
        Vector3d x = grid_box.min() + step.cwiseProduct(Vector3d(i, j, k));
        if (walk_to_surface(surface, x) && box.contains(x)) state->seeds.push_back(x);
      }
  if (state->seeds.size() < 64)
    throw DomainError("surface seeding failed: only " + std::to_string(state->seeds.size()) +
                      " grid points reached the zero level set");
  return surface;
}

ImplicitSurface ImplicitSurface::sphere(const Vector3d& center, double radius) {
  if (!(radius > 0.0) || !center.allFinite())
    throw DomainError("sphere: radius must be positive and center finite");
  const Vector3d r = Vector3d::Constant(radius);
  return build(SurfaceKind::Sphere, SphereParams{center, radius}, Box3d(center - r, center + r));
}

ImplicitSurface ImplicitSurface::torus(double major, double minor) {
  if (!(minor > 0.0) || !(minor < major))
    throw DomainError("torus: need 0 < minor < major");
  const Vector3d ext(major + minor, major + minor, minor);
  return build(SurfaceKind::Torus, TorusParams{major, minor}, Box3d(-ext, ext));
}

ImplicitSurface ImplicitSurface::ellipsoid(double a, double b, double c) {
  if (!(c > 0.0) || !(b >= c) || !(a >= b))
    throw DomainError("ellipsoid: need a >= b >= c > 0");
  const Vector3d ext(a, b, c);
  return build(SurfaceKind::Ellipsoid, EllipsoidParams{ext}, Box3d(-ext, ext));
}

ImplicitSurface ImplicitSurface::metaball_blend(std::vector<Metaball> balls, double sharpness) {
  if (balls.empty()) throw DomainError("metaball_blend: need at least one ball");
  if (!(sharpness > 0.0)) throw DomainError("metaball_blend: blend exponent must be positive");
  double total_weight = 0.0;
  for (const auto& b : balls) {
    if (!(b.radius > 0.0) || !(b.weight > 0.0) || !b.center.allFinite())
      throw DomainError("metaball_blend: every ball needs positive radius and weight");
    total_weight += b.weight;
  }
  if (!balls_connected(balls))
    throw DomainError("metaball_blend: balls do not overlap into one connected component");

  // F >= min_i g_i - log(sum w)/k, so F <= 0 forces some g_i <= log(sum w)/k.
  const double slack = std::max(0.0, std::log(total_weight) / sharpness);
  Box3d box;
  for (const auto& b : balls) {
    const double reach = std::sqrt(b.radius * b.radius + 2.0 * b.radius * slack);
    box.extend(b.center - Vector3d::Constant(reach));
    box.extend(b.center + Vector3d::Constant(reach));
  }
  ImplicitSurface surface =
      build(SurfaceKind::MetaballBlend, MetaballParams{std::move(balls), sharpness}, padded(box, 0.01));
  double min_gradient = std::numeric_limits<double>::infinity();
  for (const auto& s : surface.seeds())
    min_gradient = std::min(min_gradient, surface.field(s).gradient.norm());
  if (min_gradient < kMetaballMinGradient)
    throw DomainError("metaball_blend: zero level set is not regular (min |grad F| = " +
                      std::to_string(min_gradient) + ")");
  return surface;
}

ImplicitSurface ImplicitSurface::from_catalog(std::string_view name,
                                              const std::map<std::string, std::string>& params) {
  auto take = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : parse_double(key, it->second);
  };
  auto reject_unknown = [&](std::initializer_list<std::string_view> known) {
    for (const auto& [key, value] : params)
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ConfigError("surface." + key + ": unknown parameter for " + std::string(name));
  };
  auto wrap = [&](auto&& make) -> ImplicitSurface {
    try {
      return make();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("surface: ") + e.what());
    }
  };

  if (name == "sphere") {
    reject_unknown({"R", "cx", "cy", "cz"});
    const double radius = take("R", 1.0);
    if (!(radius > 0.0)) throw ConfigError("surface.R: sphere radius must be > 0");
    return wrap([&] {
      return sphere(Vector3d(take("cx", 0.0), take("cy", 0.0), take("cz", 0.0)), radius);
    });
  }
  if (name == "torus") {
    reject_unknown({"R", "r"});
    const double major = take("R", 2.0);
    const double minor = take("r", 1.0);
    if (!(major > 0.0)) throw ConfigError("surface.R: torus major radius must be > 0");
    if (!(minor > 0.0) || !(minor < major))
      throw ConfigError("surface.r: torus minor radius must satisfy 0 < r < R");
    return wrap([&] { return torus(major, minor); });
  }
  if (name == "ellipsoid") {
    reject_unknown({"a", "b", "c"});
    const double a = take("a", 3.0), b = take("b", 2.0), c = take("c", 1.0);
    if (!(c > 0.0)) throw ConfigError("surface.c: must be > 0");
    if (!(b >= c)) throw ConfigError("surface.b: need b >= c");
    if (!(a >= b)) throw ConfigError("surface.a: need a >= b");
    return wrap([&] { return ellipsoid(a, b, c); });
  }
  if (name == "metaball_blend") {
    reject_unknown({"k", "balls"});
    std::vector<Metaball> balls;
    auto it = params.find("balls");
    const std::string spec = it == params.end() ? "0 0 0 1 1; 1.2 0 0 0.8 1" : it->second;
    std::stringstream groups(spec);
    std::string group;
    while (std::getline(groups, group, ';')) {
      std::stringstream fields(group);
      std::vector<double> v;
      std::string token;
      while (fields >> token) v.push_back(parse_double("balls", token));
      if (v.empty()) continue;
      if (v.size() != 5)
        throw ConfigError("surface.balls: each ball is 'x y z radius weight', got '" + group + "'");
      balls.push_back({Vector3d(v[0], v[1], v[2]), v[3], v[4]});
    }
    const double k = take("k", 8.0);
    return wrap([&] { return metaball_blend(std::move(balls), k); });
  }
  throw ConfigError("surface: unknown catalog surface '" + std::string(name) +
                    "' (expected sphere, torus, ellipsoid or metaball_blend)");
}

bool ImplicitSurface::in_domain(const Vector3d& x) const {
  const Vector3d c = state_->box.center();
  const Vector3d half = state_->box.sizes();  // twice the half extent
  return ((x - c).cwiseAbs().array() <= half.array()).all();
}

std::string ImplicitSurface::describe() const {
  std::ostringstream os;
  os << name() << '(';
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SphereParams>)
          os << "R=" << p.radius << ", c=(" << p.center.x() << ',' << p.center.y() << ','
             << p.center.z() << ')';
        else if constexpr (std::is_same_v<P, TorusParams>)
          os << "R=" << p.major << ", r=" << p.minor;
        else if constexpr (std::is_same_v<P, EllipsoidParams>)
          os << "a=" << p.semi_axes.x() << ", b=" << p.semi_axes.y() << ", c=" << p.semi_axes.z();
        else
          os << "balls=" << p.balls.size() << ", k=" << p.sharpness;
      },
      state_->params);
  os << ')';
  return os.str();
}

FieldSample<double> evaluate_field(const ImplicitSurface& surface, const Vector3d& x) {
  if (!x.allFinite() || !surface.in_domain(x))
    throw DomainError("evaluate_field: point outside twice the bounding box");
  if (surface.kind() == SurfaceKind::Torus &&
      std::hypot(x.x(), x.y()) < 1e-9 * surface.diagonal())
    throw DomainError("evaluate_field: torus field is singular on its axis");
  FieldSample<double> s = surface.field(x);
  if (!std::isfinite(s.value) || !s.gradient.allFinite() || !s.hessian.allFinite())
    throw DomainError("evaluate_field: non-finite field value");
  return s;
}

Vector3d inward_normal(const ImplicitSurface& surface, const Vector3d& p) {
  const auto s = evaluate_field(surface, p);
  const double g = s.gradient.norm();
  if (g < kMinGradient) throw DegenerateGradientError("inward_normal: |grad F| below 1e-8");
  return -s.gradient / g;
}

PrincipalCurvatures principal_curvatures(const ImplicitSurface& surface, const Vector3d& p) {
  const auto s = evaluate_field(surface, p);
  const double g = s.gradient.norm();
  if (g < kMinGradient)
    throw DegenerateGradientError("principal_curvatures: |grad F| below 1e-8");
  const Vector3d outward = s.gradient / g;
  const auto [t1, t2] = tangent_basis(outward);
  Eigen::Matrix<double, 3, 2> basis;
  basis << t1, t2;
  // Shape operator of the level set: tangential block of Hess F / |grad F|.
  const Eigen::Matrix2d shape = basis.transpose() * s.hessian * basis / g;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(shape, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues()(1), eig.eigenvalues()(0)};
}

bool walk_to_surface(const ImplicitSurface& surface, Vector3d& x, int max_iterations) {
  const double tol = 1e-13 * surface.diagonal();
  const double max_step = 0.25 * surface.diagonal();
  try {
    for (int it = 0; it < max_iterations; ++it) {
      const auto s = evaluate_field(surface, x);
      const double g2 = s.gradient.squaredNorm();
      if (g2 < kMinGradient * kMinGradient) return false;
      Vector3d step = -s.value * s.gradient / g2;
      const double len = step.norm();
      if (len > max_step) step *= max_step / len;
      x += step;
      if (len <= tol) return std::abs(surface.field(x).value) <= surface.on_surface_tol();
    }
  } catch (const DomainError&) {
    return false;
  }
  return false;
}

}  // namespace lfslab
