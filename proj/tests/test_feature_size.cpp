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

#include <sstream>

#include "test_helpers.hpp"

using namespace lfslab;
using namespace lfslab::testing;

TEST_CASE("analytic feature size examples") {
  const auto s = FeatureSize::analytic(unit_sphere());
  CHECK(s(Vector3d(0, 0, 1)) == 1.0);
  CHECK(s(Vector3d(0.6, 0, 0.8)) == doctest::Approx(1.0).epsilon(1e-15));
  const auto t = FeatureSize::analytic(torus21());
  CHECK(t(Vector3d(3, 0, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  const auto t15 = FeatureSize::analytic(ImplicitSurface::torus(1.5, 1.0));
  CHECK(t15(Vector3d(0.5, 0, 0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t15.mode() == LfsMode::Analytic);
  CHECK(t15.resolution() == 0.0);
  CHECK_THROWS_AS(FeatureSize::analytic(ellipsoid321()), ConfigError);
}

TEST_CASE("lipschitz residual examples") {
  const auto s = FeatureSize::analytic(unit_sphere());
  CHECK(lipschitz_residual(s, Vector3d(0.3, 0.1, 0.2), Vector3d(-0.4, 0.9, 0.1)) == 0.0);
  const auto t = FeatureSize::analytic(torus21());
  CHECK(lipschitz_residual(t, Vector3d(3, 0, 0), Vector3d(3, 0, 0.1)) <= 1e-9);
  CHECK(lipschitz_residual(t, Vector3d(3, 0, 0), Vector3d(3, 0, 0)) == 0.0);
}

TEST_CASE("1-Lipschitz property in analytic mode") {
  std::mt19937_64 rng(11);
  for (const auto& surf : {unit_sphere(), torus21()}) {
    const auto model = FeatureSize::analytic(surf);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i)
      worst = std::max(worst, lipschitz_residual(model, in_box(surf, rng), in_box(surf, rng)));
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("medial sample of the sphere collapses to the center") {
  const auto s = unit_sphere();
  const auto cloud = medial_sample(s, 100, 42);
  int inside = 0;
  for (const auto& m : cloud) {
    CHECK(std::abs((m.center - m.contact).norm() - m.radius) <= 1e-7);
    CHECK(m.method == LfsMode::Numeric);
    if (m.side != Side::Inside) continue;
    ++inside;
    CHECK(m.center.norm() <= 1e-3);
    CHECK(std::abs(m.radius - 1.0) <= 1e-3);
  }
  CHECK(inside == 100);
  CHECK_THROWS_AS(medial_sample(s, 10, 42), InsufficientSamplingError);
  // Determinism.
  const auto again = medial_sample(s, 100, 42);
  REQUIRE(again.size() == cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) CHECK(again[i].center == cloud[i].center);
}

TEST_CASE("medial sample of the torus tracks the core circle") {
  const auto t = torus21();
  const auto cloud = medial_sample(t, 500, 7);
  int inside = 0;
  for (const auto& m : cloud) {
    if (m.side != Side::Inside) continue;
    ++inside;
    const double rho = m.center.head<2>().norm();
    CHECK(std::hypot(rho - 2.0, m.center.z()) <= 1e-2);
  }
  CHECK(inside == 500);
}

TEST_CASE("shrinking balls are empty") {
  for (const auto& surf : catalog()) {
    CAPTURE(surf.describe());
    const auto cloud = medial_sample(surf, 100, 3, 10000);
    const auto dense = surface_sample(surf, 5000, 1234);
    for (const auto& m : cloud) {
      CHECK(std::abs((m.center - m.contact).norm() - m.radius) <= 1e-7);
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& p : dense) nearest = std::min(nearest, (p - m.center).norm());
      CHECK(nearest >= m.radius * (1.0 - 1e-6));
    }
  }
}

TEST_CASE("numeric mode needs enough medial points") {
  const auto s = unit_sphere();
  auto cloud = medial_sample(s, 100, 1);
  cloud.resize(50);
  CHECK_THROWS_AS(FeatureSize::from_cloud(s, cloud), InsufficientSamplingError);
}

TEST_CASE("numeric and analytic modes agree on the torus") {
  const auto t = torus21();
  const auto analytic = FeatureSize::analytic(t);
  const auto numeric = FeatureSize::numeric(t, 500, 42);
  CHECK(numeric.mode() == LfsMode::Numeric);
  CHECK(numeric.resolution() > 0.0);
  int n = 0;
  for (const auto& p : surface_sample(t, 200, 77)) {
    const double a = analytic(p);
    CHECK(std::abs(numeric.unscaled(p) - a) <= 0.02 * a);
    CHECK(numeric(p) == doctest::Approx(FeatureSize::kSafetyFactor * numeric.unscaled(p)));
    ++n;
  }
  CHECK(n == 200);

  std::mt19937_64 rng(8);
  const double slack = 2.0 * numeric.resolution();
  for (int i = 0; i < 2000; ++i) {
    const Vector3d x = in_box(t, rng);
    const Vector3d y = in_box(t, rng);
    CHECK(lipschitz_residual(numeric, x, y) <= 0.05 * (x - y).norm() + slack);
  }
}

TEST_CASE("feature size is positive and bounded by the curvature radius") {
  for (const auto& surf : catalog()) {
    CAPTURE(surf.describe());
    const auto model = has_analytic_medial_axis(surf) ? FeatureSize::analytic(surf)
                                                      : FeatureSize::numeric(surf, 500, 42);
    for (const auto& p : surface_sample(surf, 300, 21)) {
      const double f = model(p);
      CHECK(f > 0.0);
      CHECK(f <= 1.0 / principal_curvatures(surf, p).max_abs() + 1e-6);
      const auto sp = make_surface_point(model, p);
      CHECK(sp.lfs == f);
    }
  }
}

TEST_CASE("medial cloud csv") {
  const auto s = unit_sphere();
  const auto cloud = medial_sample(s, 100, 42);
  std::ostringstream out;
  write_medial_csv(out, cloud);
  const auto text = out.str();
  CHECK(text.rfind("x,y,z,radius,side\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(cloud.size() + 1));
}

TEST_CASE("lfs mode names") {
  CHECK(to_string(LfsMode::Analytic) == "analytic");
  CHECK(lfs_mode_from_string("numeric") == LfsMode::Numeric);
  CHECK_THROWS_AS(lfs_mode_from_string("exact"), ConfigError);
}
