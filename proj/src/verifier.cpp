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
#include <lfslab/verifier.hpp>

#include <numbers>
#include <ostream>

namespace lfslab {

namespace {

void check_eps(double eps, const char* what, bool open_upper) {
  const bool ok = eps >= 0.0 && (open_upper ? eps < kEpsMax : eps <= kEpsMax);
  if (!ok)
    throw DomainError(std::string(what) + ": eps must lie in [0, 1/3" + (open_upper ? ")" : "]"));
}

}  // namespace

double bound_ab(double eps) {
  check_eps(eps, "bound_ab", true);
  return eps / (1.0 - 3.0 * eps);
}

double bound_new(double eps) {
  check_eps(eps, "bound_new", false);
  if (eps == 0.0) return 0.0;
  // Reciprocal form rounds the double nearest 1/3 to exactly 0.5.
  return 1.0 / (1.0 / eps - 1.0);
}

double bound_log(double eps) {
  check_eps(eps, "bound_log", false);
  return -std::log1p(-eps);
}

PairRecord verify_pair(const FeatureSize& model, const Vector3d& q, const Vector3d& q2) {
  PairRecord r;
  r.q = make_surface_point(model, q);
  r.q2 = make_surface_point(model, q2);
  r.dist = (q2 - q).norm();
  r.eps_thm = r.dist / r.q.lfs;
  r.eps_ab = r.dist / std::min(r.q.lfs, r.q2.lfs);
  if (!(r.eps_thm <= kEpsMax))
    throw RejectedPairError("verify_pair: d(q,q')/f(q) = " + std::to_string(r.eps_thm) +
                            " exceeds 1/3");
  r.angle = angle_between(r.q.normal, r.q2.normal);
  r.bound_ab = r.eps_ab < kEpsMax ? bound_ab(r.eps_ab) : std::numeric_limits<double>::infinity();
  r.bound_new = bound_new(r.eps_thm);
  r.bound_log = bound_log(r.eps_thm);
  const double tol = angle_tolerance(model);
  r.pass_new = r.angle <= r.bound_new + tol;
  r.pass_log = r.angle <= r.bound_log + tol;
  r.margin_log = r.bound_log - r.angle;
  return r;
}

SegmentTrace integrate_theta(const FeatureSize& model, const Vector3d& q, const Vector3d& q2,
                             std::size_t steps) {
  if (steps < 100) throw DomainError("integrate_theta: steps must be >= 100");
  const PairRecord pair = verify_pair(model, q, q2);
  const ImplicitSurface& surface = model.surface();

  SegmentTrace trace;
  trace.q = pair.q;
  trace.q2 = pair.q2;
  trace.eps = pair.eps_thm;
  trace.angle = pair.angle;
  trace.steps = steps;
  trace.integration_tol = 10.0 / (static_cast<double>(steps) * steps) + 1e-7;
  if (pair.dist == 0.0) return trace;

  const double d = pair.dist;
  const double eps = pair.eps_thm;
  const double f_q = pair.q.lfs;
  const double omega_tol = model.mode() == LfsMode::Analytic ? 1e-9 : 1e-6;
  const double rate_slack = 1e2 / static_cast<double>(steps);
  const Vector3d dir = (q2 - q) / d;

  trace.samples.resize(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    TraceSample& s = trace.samples[i];
    s.t = d * static_cast<double>(i) / static_cast<double>(steps);
    s.p = i == steps ? q2 : Vector3d(q + s.t * dir);
    ProjectionResult proj;
    try {
      proj = project(surface, s.p);
    } catch (const MedialAmbiguityError& e) {
      throw TraceError(std::string("integrate_theta: sample on the medial axis: ") + e.what());
    }
    s.foot = proj.foot;
    s.omega = proj.distance;
    s.f_foot = model(s.foot);
    if (s.omega >= 0.9 * s.f_foot)
      throw TraceError("integrate_theta: sample inside the near-medial guard band");
    s.theta = angle_between(pair.q.normal, inward_normal(surface, s.foot));
    s.omega_bound = 2.0 * eps / (1.0 - 2.0 * eps) * s.f_foot;
    s.rate_bound = 1.0 / ((1.0 - eps * s.t / d) * f_q);
    s.omega_ok = s.omega <= s.omega_bound + omega_tol;
  }
  trace.samples.front().theta = 0.0;

  const double h = d / static_cast<double>(steps);
  double total = 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    TraceSample& s = trace.samples[i];
    double rate;
    if (i == 0)
      rate = (trace.samples[1].theta - s.theta) / h;
    else if (i == steps)
      rate = (s.theta - trace.samples[i - 1].theta) / h;
    else
      rate = (trace.samples[i + 1].theta - trace.samples[i - 1].theta) / (2.0 * h);
    s.theta_rate = std::abs(rate);
    s.rate_ok = s.theta_rate <= s.rate_bound + rate_slack;
    if (i > 0) total += std::abs(s.theta - trace.samples[i - 1].theta);
    trace.omega_ok = trace.omega_ok && s.omega_ok;
    trace.rate_ok = trace.rate_ok && s.rate_ok;
  }
  trace.integrated_angle = total;
  trace.integration_ok = std::abs(total - trace.angle) <= trace.integration_tol;
  return trace;
}

void write_trace_csv(std::ostream& out, const SegmentTrace& trace) {
  const auto old_precision = out.precision(17);
  out << "t,px,py,pz,fx,fy,fz,omega,theta,theta_rate,f_foot,omega_bound,rate_bound,omega_ok,"
         "rate_ok\n";
  for (const auto& s : trace.samples)
    out << s.t << ',' << s.p.x() << ',' << s.p.y() << ',' << s.p.z() << ',' << s.foot.x() << ','
        << s.foot.y() << ',' << s.foot.z() << ',' << s.omega << ',' << s.theta << ','
        << s.theta_rate << ',' << s.f_foot << ',' << s.omega_bound << ',' << s.rate_bound << ','
        << int(s.omega_ok) << ',' << int(s.rate_ok) << '\n';
  out.precision(old_precision);
}

std::vector<std::pair<double, double>> claim3_probe(const FeatureSize& model, const Vector3d& p,
                                                    const Vector3d& direction,
                                                    const std::vector<double>& deltas) {
  const ImplicitSurface& surface = model.surface();
  const double floor = 1e3 * std::numeric_limits<double>::epsilon() * surface.diagonal();
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] >= floor) || (i > 0 && !(deltas[i] < deltas[i - 1])))
      throw DomainError("claim3_probe: deltas must be strictly decreasing and above round-off");
  }
  std::vector<std::pair<double, double>> out;
  if (deltas.empty()) return out;
  const Vector3d u = direction.normalized();
  const auto base = project(surface, p);
  for (double dt : deltas) {
    const Vector3d moved = p + dt * u;
    const Vector3d foot = project_from(surface, moved, base.foot).foot;
    const Vector3d r = offset_point(surface, foot, base.distance, base.side);
    out.emplace_back(dt, (r - p).norm() / dt);
  }
  return out;
}

Vector3d chord_sphere_point(const ImplicitSurface& surface, const Vector3d& q, double phi,
                            double radius) {
  const Vector3d n = inward_normal(surface, q);
  const auto [t1, t2] = tangent_basis(n);
  const Vector3d d = std::cos(phi) * t1 + std::sin(phi) * t2;
  auto point = [&](double s) { return Vector3d(q + radius * (std::cos(s) * d + std::sin(s) * n)); };
  auto value = [&](double s) { return evaluate_field(surface, point(s)).value; };

  // F > 0 toward -n (outside), F < 0 toward +n (inside): bracket from s = 0
  // into whichever half changes sign.
  double lo = 0.0, hi = 0.0;
  const double f0 = value(0.0);
  if (f0 == 0.0) return point(0.0);
  if (f0 > 0.0) {
    hi = std::numbers::pi / 2;
    if (value(hi) >= 0.0) throw ConvergenceError("chord_sphere_point: no sign change");
  } else {
    lo = -std::numbers::pi / 2;
    if (value(lo) <= 0.0) throw ConvergenceError("chord_sphere_point: no sign change");
  }
  // Invariant: F(point(lo)) > 0 > F(point(hi)).
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = value(mid);
    if (fm == 0.0) return point(mid);
    (fm > 0.0 ? lo : hi) = mid;
  }
  const double fl = std::abs(value(lo)), fh = std::abs(value(hi));
  return point(fl <= fh ? lo : hi);
}

}  // namespace lfslab
