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
#include <lfslab/projection.hpp>

#include "test_helpers.hpp"

using namespace lfslab;
using namespace lfslab::testing;

TEST_CASE("project on the unit sphere") {
  const auto s = unit_sphere();
  auto r = project(s, Vector3d(0, 0, 0.5));
  CHECK(r.converged);
  CHECK((r.foot - Vector3d(0, 0, 1)).norm() <= 1e-12);
  CHECK(r.distance == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.side == Side::Inside);

  r = project(s, Vector3d(2, 0, 0));
  CHECK((r.foot - Vector3d(1, 0, 0)).norm() <= 1e-12);
  CHECK(r.distance == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.side == Side::Outside);

  CHECK(project(s, Vector3d(0.6, 0.8, 0)).side == Side::OnSurface);
  CHECK_THROWS_AS(project(s, Vector3d::Zero()), MedialAmbiguityError);
  CHECK_THROWS_AS(project(s, Vector3d(9, 0, 0)), DomainError);
}

TEST_CASE("medial axis of the torus is detected") {
  const auto t = torus21();
  CHECK_THROWS_AS(project(t, Vector3d(2, 0, 0)), MedialAmbiguityError);      // core circle
  CHECK_THROWS_AS(project(t, Vector3d(0, -2, 0)),
                  MedialAmbiguityError);
  CHECK_THROWS_AS(project(t, Vector3d(1e-12, 0, 0.5)), Error);               // axis
  CHECK_NOTHROW(project(t, Vector3d(2.3, 0, 0)));
}

TEST_CASE("extended normals") {
  const auto s = unit_sphere();
  CHECK(extended_normal(s, Vector3d(2, 0, 0)).isApprox(Vector3d(-1, 0, 0)));
  CHECK(extended_normal(s, Vector3d(0, 0, 0.5)).isApprox(Vector3d(0, 0, -1)));
  const auto t = torus21();
  CHECK((project(t, Vector3d(4, 0, 0)).foot - Vector3d(3, 0, 0)).norm() <= 1e-12);
  CHECK(extended_normal(t, Vector3d(4, 0, 0)).isApprox(Vector3d(-1, 0, 0)));
  CHECK_THROWS_AS(extended_normal(s, Vector3d::Zero()), MedialAmbiguityError);
}

TEST_CASE("projection result invariants and global optimality") {
  std::mt19937_64 rng(2024);
  for (const auto& s : catalog()) {
    CAPTURE(s.describe());
    // Brute-force oracle: no point of a dense surface sample may be closer
    // than the reported foot.
    const auto dense = surface_sample(s, 4000, 99);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
      const Vector3d x = in_box(s, rng);
      ProjectionResult r;
      try {
        r = project(s, x);
      } catch (const MedialAmbiguityError&) {
        continue;
      }
      ++checked;
      const auto f = evaluate_field(s, r.foot);
      CHECK(std::abs(f.value) <= s.on_surface_tol());
      CHECK(std::abs(r.distance - (x - r.foot).norm()) <= 1e-12);
      if (r.distance > 1e-6) {
        const double angle = angle_between((x - r.foot).normalized(), f.gradient.normalized());
        CHECK(std::min(angle, std::numbers::pi - angle) <= 1e-7);
      }
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& p : dense) nearest = std::min(nearest, (p - x).norm());
      CHECK(r.distance <= nearest + 1e-12);
      // Idempotence.
      CHECK(project(s, r.foot).distance <= s.on_surface_tol());
    }
    CHECK(checked > 250);
  }
}

TEST_CASE("sphere distance depends only on the radius") {
  const auto s = unit_sphere();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Vector3d x = in_box(s, rng) * 1.9;
    if (x.norm() < 1e-3) continue;
    CHECK(std::abs(project(s, x).distance - std::abs(x.norm() - 1.0)) <= 1e-12);
  }
}

TEST_CASE("normal offsets below the feature size stay on their normal line") {
  std::mt19937_64 rng(17);
  for (const auto& s : {unit_sphere(), torus21()}) {
    const auto lfs = FeatureSize::analytic(s);
    for (const auto& foot : surface_sample(s, 200, 8)) {
      const Vector3d n = inward_normal(s, foot);
      const double f = lfs(foot);
      std::uniform_real_distribution<double> u(0.01, 0.99);
      for (double sign : {1.0, -1.0}) {
        const double omega = u(rng) * f;
        const auto r = project(s, foot + sign * omega * n);
        CHECK(std::abs(r.distance - omega) <= 1e-9);
        CHECK((r.foot - foot).norm() <= 1e-7);
        CHECK(r.side == (sign > 0 ? Side::Inside : Side::Outside));
      }
    }
  }
}

TEST_CASE("project_from converges locally") {
  const auto t = torus21();
  const auto r = project_from(t, Vector3d(3.2, 0.1, 0.05), Vector3d(3, 0, 0));
  CHECK(r.converged);
  CHECK(std::abs(evaluate_field(t, r.foot).value) <= t.on_surface_tol());
  CHECK(offset_point(t, Vector3d(3, 0, 0), 0.25, Side::Outside).isApprox(Vector3d(3.25, 0, 0)));
  CHECK(offset_point(t, Vector3d(3, 0, 0), 0.25, Side::Inside).isApprox(Vector3d(2.75, 0, 0)));
}

TEST_CASE("gradient identity residual") {
  const auto s = unit_sphere();
  const auto ls = FeatureSize::analytic(s);
  CHECK(gradient_identity_residual(s, ls, Vector3d(0, 0, 0.5)) <= 1e-5);
  const auto t = torus21();
  const auto lt = FeatureSize::analytic(t);
  CHECK(gradient_identity_residual(t, lt, Vector3d(3.5, 0, 0)) <= 1e-5);
  CHECK_THROWS_AS(gradient_identity_residual(s, ls, Vector3d(1, 0, 0)), DomainError);
  CHECK(gradient_identity_residual(t, lt, Vector3d(1.5, 0, 0)) <= 1e-5);

  std::mt19937_64 rng(3);
  int valid = 0;
  for (int i = 0; i < 400 && valid < 100; ++i) {
    const Vector3d x = in_box(t, rng);
    double residual = 0.0;
    try {
      residual = gradient_identity_residual(t, lt, x);
    } catch (const Error&) {
      continue;
    }
    CHECK(residual <= 1e-5);
    ++valid;
  }
  CHECK(valid == 100);
}
