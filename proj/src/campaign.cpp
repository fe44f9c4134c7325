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
#include <lfslab/campaign.hpp>
#include <lfslab/runtime.hpp>

#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace lfslab {

void validate(const CampaignConfig& c) {
  if (c.surface.empty()) throw ConfigError("surface: required");
  constexpr std::array<std::string_view, 4> catalog{"sphere", "torus", "ellipsoid",
                                                    "metaball_blend"};
  if (std::find(catalog.begin(), catalog.end(), c.surface) == catalog.end())
    throw ConfigError("surface: unknown surface '" + c.surface +
                      "' (expected sphere, torus, ellipsoid or metaball_blend)");
  if (c.lfs_mode == LfsMode::Analytic && c.surface != "sphere" && c.surface != "torus")
    throw ConfigError("lfs_mode: analytic feature size is unavailable for " + c.surface);
  if (!(c.eps_max > 0.0) || !(c.eps_max <= kEpsMax))
    throw ConfigError("eps_max: must lie in (0, 1/3]");
  if (c.n_pairs < 1) throw ConfigError("n_pairs: must be >= 1");
  if (c.n_traces > c.n_pairs) throw ConfigError("n_traces: must not exceed n_pairs");
  if (c.n_traces > 0 && c.steps < 100) throw ConfigError("steps: must be >= 100 when traces run");
  if (c.n_probes > c.n_pairs) throw ConfigError("n_probes: must not exceed n_pairs");
  if (c.lfs_mode == LfsMode::Numeric && c.medial_contacts < 100)
    throw ConfigError("medial_contacts: must be >= 100");
}

LfsMode resolve_lfs_mode(const CampaignConfig& config, const ImplicitSurface& surface) {
  if (config.lfs_mode == LfsMode::Analytic && !has_analytic_medial_axis(surface))
    throw ConfigError("lfs_mode: analytic feature size is unavailable for " +
                      std::string(surface.name()));
  if (config.lfs_mode) return *config.lfs_mode;
  return has_analytic_medial_axis(surface) ? LfsMode::Analytic : LfsMode::Numeric;
}

namespace {

enum class Outcome { Passed, Violated, Rejected, Discarded };

struct PairResult {
  Outcome outcome = Outcome::Discarded;
  std::optional<PairRecord> record;
  bool traced = false;
  bool trace_failed = false;
  std::uint64_t samples = 0, omega_ok = 0, rate_ok = 0;
  bool integration_ok = false;
  bool probed = false;
  std::optional<double> claim3_final;
};

std::mt19937_64 pair_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

PairResult run_pair(const CampaignConfig& config, const FeatureSize& model, std::uint64_t index) {
  const ImplicitSurface& surface = model.surface();
  auto rng = pair_rng(config.seed, index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box3d& box = surface.bounding_box();
  const Vector3d draw(unit(rng), unit(rng), unit(rng));
  const double u = 1.0 - unit(rng);  // (0, 1]
  const double phi = 2.0 * std::numbers::pi * unit(rng);

  PairResult out;
  Vector3d q, q2;
  try {
    q = project(surface, box.min() + draw.cwiseProduct(box.sizes())).foot;
    q2 = chord_sphere_point(surface, q, phi, u * config.eps_max * model(q));
  } catch (const Error&) {
    return out;
  }
  try {
    out.record = verify_pair(model, q, q2);
  } catch (const RejectedPairError&) {
    out.outcome = Outcome::Rejected;
    return out;
  } catch (const Error&) {
    return out;
  }
  out.outcome = out.record->pass_new && out.record->pass_log ? Outcome::Passed : Outcome::Violated;

  if (index < config.n_traces) {
    out.traced = true;
    try {
      const auto trace = integrate_theta(model, q, q2, config.steps);
      out.samples = trace.samples.size();
      for (const auto& s : trace.samples) {
        out.omega_ok += s.omega_ok;
        out.rate_ok += s.rate_ok;
      }
      out.integration_ok = trace.integration_ok;
    } catch (const Error&) {
      out.trace_failed = true;
    }
  }
  if (index < config.n_probes && q != q2) {
    out.probed = true;
    try {
      const Vector3d mid = 0.5 * (q + q2);
      const Vector3d n = extended_normal(surface, mid);
      const Vector3d chord = q2 - q;
      const Vector3d tangent = chord - chord.dot(n) * n;
      const double f_mid = model(mid);
      std::vector<double> deltas;
      for (int k = 4; k <= 16; ++k) deltas.push_back(std::ldexp(f_mid, -k));
      out.claim3_final = claim3_probe(model, mid, tangent, deltas).back().second;
    } catch (const Error&) {
    }
  }
  return out;
}

std::optional<double> rate(std::uint64_t passed, std::uint64_t total) {
  if (total == 0) return std::nullopt;
  return static_cast<double>(passed) / static_cast<double>(total);
}

}  // namespace

CampaignReport run_campaign(const CampaignConfig& config, std::vector<PairRecord>* records) {
  validate(config);
  const auto started = std::chrono::steady_clock::now();
  const ImplicitSurface surface = ImplicitSurface::from_catalog(config.surface, config.surface_params);
  const LfsMode mode = resolve_lfs_mode(config, surface);
  const FeatureSize model = mode == LfsMode::Analytic
                                ? FeatureSize::analytic(surface)
                                : FeatureSize::numeric(surface, config.medial_contacts, config.seed);

  std::vector<PairResult> results(config.n_pairs);
  detail::parallel_for(config.n_pairs, worker_count(),
                       [&](std::size_t i) { results[i] = run_pair(config, model, i); });

  CampaignReport report;
  report.config = config;
  report.lfs_mode = mode;
  report.angle_tol = angle_tolerance(model);
  report.version = std::string(kVersion);
  auto& diag = report.diagnostics;
  if (records) records->clear();
  for (const auto& r : results) {
    ++report.counts.pairs;
    switch (r.outcome) {
      case Outcome::Passed: ++report.counts.passed; break;
      case Outcome::Violated: ++report.counts.violated; break;
      case Outcome::Rejected: ++report.counts.rejected; break;
      case Outcome::Discarded: ++report.counts.discarded; break;
    }
    if (r.record && (r.outcome == Outcome::Passed || r.outcome == Outcome::Violated)) {
      const PairRecord& rec = *r.record;
      if (records) records->push_back(rec);
      report.violations_new += !rec.pass_new;
      report.violations_log += !rec.pass_log;
      report.max_eps = std::max(report.max_eps, rec.eps_thm);
      if (rec.bound_log > 0.0) {
        report.max_ratio_log = std::max(report.max_ratio_log, rec.angle / rec.bound_log);
        report.max_ratio_new = std::max(report.max_ratio_new, rec.angle / rec.bound_new);
      }
      const double scaled = rec.margin_log / kHistogramMax * kHistogramBins;
      const auto bin = static_cast<std::size_t>(
          std::clamp(std::floor(scaled), 0.0, static_cast<double>(kHistogramBins - 1)));
      ++report.margin_histogram[bin];
    }
    if (r.traced) {
      if (r.trace_failed) {
        ++diag.traces_failed;
      } else {
        ++diag.traces_run;
        diag.trace_samples += r.samples;
        diag.omega_checks_passed += r.omega_ok;
        diag.rate_checks_passed += r.rate_ok;
        diag.integration_passed += r.integration_ok;
      }
    }
    if (r.probed) {
      if (r.claim3_final) {
        ++diag.probes_run;
        diag.claim3_final_ratios.push_back(*r.claim3_final);
      } else {
        ++diag.probes_failed;
      }
    }
  }
  diag.omega_pass_rate = rate(diag.omega_checks_passed, diag.trace_samples);
  diag.rate_pass_rate = rate(diag.rate_checks_passed, diag.trace_samples);
  diag.integration_pass_rate = rate(diag.integration_passed, diag.traces_run);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace lfslab
