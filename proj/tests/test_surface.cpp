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
#include <doctest.h>

#include <lfslab/feature_size.hpp>
#include <lfslab/surface.hpp>

#include "test_helpers.hpp"

using namespace lfslab;
using namespace lfslab::testing;

TEST_CASE("evaluate_field on the unit sphere") {
  const auto s = unit_sphere();
  auto on = evaluate_field(s, Vector3d(1, 0, 0));
  CHECK(on.value == 0.0);
  CHECK(on.gradient.isApprox(Vector3d(2, 0, 0)));
  CHECK(on.hessian.isApprox(2.0 * Matrix3d::Identity()));

  auto center = evaluate_field(s, Vector3d::Zero());
  CHECK(center.value == -1.0);
  CHECK(center.gradient.norm() == 0.0);
  CHECK(center.hessian.isApprox(2.0 * Matrix3d::Identity()));
}

TEST_CASE("evaluate_field on the torus outer equator") {
  // (sqrt(9) - 2)^2 + 0 - 1 = 0 by hand.
  const auto t = torus21();
  CHECK(evaluate_field(t, Vector3d(3, 0, 0)).value == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(evaluate_field(t, Vector3d(0, 2, 0.5)).value == doctest::Approx(-0.75));
}

TEST_CASE("evaluate_field domain errors") {
  const auto s = unit_sphere();
  CHECK_THROWS_AS(evaluate_field(s, Vector3d(2.5, 0, 0)), DomainError);
  CHECK_NOTHROW(evaluate_field(s, Vector3d(1.9, -1.9, 1.9)));
  CHECK_THROWS_AS(evaluate_field(torus21(), Vector3d(0, 0, 0.3)), DomainError);
}

TEST_CASE("inward normals") {
  const auto s = unit_sphere();
  CHECK(inward_normal(s, Vector3d(1, 0, 0)).isApprox(Vector3d(-1, 0, 0)));
  CHECK(inward_normal(s, Vector3d(0, 0, -1)).isApprox(Vector3d(0, 0, 1)));
  const auto t = torus21();
  const Vector3d n = inward_normal(t, Vector3d(3, 0, 0));
  CHECK(n.isApprox(Vector3d(-1, 0, 0)));
  const auto f = evaluate_field(t, Vector3d(3, 0, 0));
  CHECK(n.isApprox(-f.gradient.normalized()));
  CHECK_THROWS_AS(inward_normal(s, Vector3d::Zero()), DegenerateGradientError);
}

TEST_CASE("principal curvatures against closed forms") {
  const auto s = unit_sphere();
  auto k = principal_curvatures(s, Vector3d(1, 0, 0));
  CHECK(k.k1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.k2 == doctest::Approx(1.0).epsilon(1e-12));

  const auto t = torus21();
  k = principal_curvatures(t, Vector3d(3, 0, 0));
  CHECK(k.k1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.k2 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  k = principal_curvatures(t, Vector3d(1, 0, 0));
  CHECK(k.k1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.k2 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(k.max_abs() == doctest::Approx(1.0));

  // Torus closed form at tube angle v: 1/r and cos v / (R + r cos v).
  for (double v : {0.3, 1.1, 2.0, 2.9}) {
    const Vector3d p((2.0 + std::cos(v)), 0.0, std::sin(v));
    k = principal_curvatures(t, p);
    const double a = 1.0, b = std::cos(v) / (2.0 + std::cos(v));
    CHECK(k.k1 == doctest::Approx(std::max(a, b)).epsilon(1e-10));
    CHECK(k.k2 == doctest::Approx(std::min(a, b)).epsilon(1e-10));
  }
}

TEST_CASE("sphere curvature equals 1/R for several radii") {
  for (double radius : {0.25, 1.0, 3.5}) {
    const auto s = ImplicitSurface::sphere(Vector3d(0.5, -1, 2), radius);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20; ++i) {
      const Vector3d p = Vector3d(0.5, -1, 2) + radius * unit_vector(rng);
      const auto k = principal_curvatures(s, p);
      CHECK(std::abs(k.k1 - 1.0 / radius) <= 1e-9);
      CHECK(std::abs(k.k2 - 1.0 / radius) <= 1e-9);
    }
  }
}

TEST_CASE("curvature agrees with finite-difference normal variation") {
  // Normal curvature along a principal direction: the derivative of the
  // inward normal along the direction d satisfies dn/ds = -k d on a surface
  // curve. On the torus outer equator the principal directions are y and z.
  const auto t = torus21();
  const Vector3d p(3, 0, 0);
  const double h = 1e-5;
  auto normal_at_angle_u = [&](double u) {
    return inward_normal(t, Vector3d(3.0 * std::cos(u), 3.0 * std::sin(u), 0.0));
  };
  auto normal_at_angle_v = [&](double v) {
    return inward_normal(t, Vector3d(2.0 + std::cos(v), 0.0, std::sin(v)));
  };
  const double k_u = (normal_at_angle_u(h) - normal_at_angle_u(-h)).norm() / (2.0 * 3.0 * h);
  const double k_v = (normal_at_angle_v(h) - normal_at_angle_v(-h)).norm() / (2.0 * h);
  const auto k = principal_curvatures(t, p);
  CHECK(k_u == doctest::Approx(k.k2).epsilon(1e-6));
  CHECK(k_v == doctest::Approx(k.k1).epsilon(1e-6));
}

TEST_CASE("field derivatives agree with central differences") {
  std::mt19937_64 rng(11);
  for (const auto& s : catalog()) {
    CAPTURE(s.describe());
    const double step = 1e-6 * s.diagonal();
    for (const Vector3d& base : s.seeds().subspan(0, std::min<std::size_t>(s.seeds().size(), 200))) {
      const Vector3d x = base + 0.05 * s.diagonal() * unit_vector(rng);
      if (!s.in_domain(x)) continue;
      const auto f = evaluate_field(s, x);
      Vector3d grad;
      Matrix3d hess;
      for (int a = 0; a < 3; ++a) {
        Vector3d e = Vector3d::Zero();
        e[a] = step;
        // Extended-precision reference evaluation of F itself.
        const auto plus = s.field<long double>((x + e).cast<long double>());
        const auto minus = s.field<long double>((x - e).cast<long double>());
        grad[a] = static_cast<double>((plus.value - minus.value) / (2.0L * step));
        hess.col(a) = (evaluate_field(s, x + e).gradient - evaluate_field(s, x - e).gradient) /
                      (2.0 * step);
      }
      CHECK((grad - f.gradient).norm() <= 1e-6 * std::max(1.0, f.gradient.norm()));
      CHECK((hess - f.hessian).norm() <= 1e-4 * std::max(1.0, f.hessian.norm()));
    }
  }
}

TEST_CASE("zero is a regular value and the surface is inside its box") {
  for (const auto& s : catalog()) {
    CAPTURE(s.describe());
    const auto points = surface_sample(s, 1000, 3);
    REQUIRE(points.size() == 1000);
    for (const auto& p : points) {
      CHECK(evaluate_field(s, p).gradient.norm() >= 1e-8);
      CHECK(std::abs(evaluate_field(s, p).value) <= s.on_surface_tol());
      CHECK(s.bounding_box().exteriorDistance(p) <= 1e-12);
    }
  }
}

TEST_CASE("catalog construction validates parameters") {
  CHECK_THROWS_AS(ImplicitSurface::torus(1.0, 1.0), DomainError);
  CHECK_THROWS_AS(ImplicitSurface::sphere(Vector3d::Zero(), -1.0), DomainError);
  CHECK_THROWS_AS(ImplicitSurface::ellipsoid(1.0, 2.0, 3.0), DomainError);
  // Two far-apart balls give a disconnected level set.
  CHECK_THROWS_AS(ImplicitSurface::metaball_blend(
                      {{Vector3d(0, 0, 0), 1.0, 1.0}, {Vector3d(5, 0, 0), 1.0, 1.0}}, 8.0),
                  DomainError);
  CHECK_NOTHROW(two_balls());

  CHECK(ImplicitSurface::from_catalog("torus", {{"R", "3"}, {"r", "0.5"}}).describe() ==
        "torus(R=3, r=0.5)");
  CHECK_THROWS_WITH_AS(ImplicitSurface::from_catalog("torus", {{"R", "1"}, {"r", "2"}}),
                       doctest::Contains("surface.r"), ConfigError);
  CHECK_THROWS_WITH_AS(ImplicitSurface::from_catalog("sphere", {{"radius", "1"}}),
                       doctest::Contains("surface.radius"), ConfigError);
  CHECK_THROWS_AS(ImplicitSurface::from_catalog("klein_bottle", {}), ConfigError);
  const auto blob = ImplicitSurface::from_catalog(
      "metaball_blend", {{"balls", "0 0 0 1 1; 0 1.1 0 0.9 2"}, {"k", "6"}});
  CHECK(blob.kind() == SurfaceKind::MetaballBlend);
}
