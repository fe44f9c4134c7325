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

#include <lfslab/verifier.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lfslab {

struct CampaignConfig {
  std::string surface;
  std::map<std::string, std::string> surface_params;
  double eps_max = 0.0;
  std::uint64_t n_pairs = 0;
  std::uint64_t n_traces = 0;
  std::uint64_t steps = 1000;
  std::uint64_t seed = 0;
  std::optional<LfsMode> lfs_mode;  ///< unset: analytic when the surface allows it
  std::uint64_t n_probes = 0;       ///< pairs that also get a claim-3 probe at their midpoint
  std::uint64_t medial_contacts = 500;
  std::string out_path;

  bool operator==(const CampaignConfig&) const = default;
};

/// Throws ConfigError naming the first offending field.
void validate(const CampaignConfig& config);

/// Analytic when requested or when unset and the surface has a closed-form
/// medial axis; numeric otherwise.
LfsMode resolve_lfs_mode(const CampaignConfig& config, const ImplicitSurface& surface);

inline constexpr std::size_t kHistogramBins = 50;
inline constexpr double kHistogramMax = 0.5;

struct CampaignCounts {
  std::uint64_t pairs = 0;
  std::uint64_t passed = 0;
  std::uint64_t violated = 0;
  std::uint64_t rejected = 0;   ///< eps_thm > 1/3 after sampling
  std::uint64_t discarded = 0;  ///< medial-ambiguous or unsolvable draws

  bool operator==(const CampaignCounts&) const = default;
};

struct CampaignDiagnostics {
  std::uint64_t traces_run = 0;
  std::uint64_t traces_failed = 0;
  std::uint64_t trace_samples = 0;
  std::uint64_t omega_checks_passed = 0;
  std::uint64_t rate_checks_passed = 0;
  std::uint64_t integration_passed = 0;
  std::optional<double> omega_pass_rate;
  std::optional<double> rate_pass_rate;
  std::optional<double> integration_pass_rate;
  std::uint64_t probes_run = 0;
  std::uint64_t probes_failed = 0;
  std::vector<double> claim3_final_ratios;

  bool operator==(const CampaignDiagnostics&) const = default;
};

struct CampaignReport {
  CampaignConfig config;
  LfsMode lfs_mode = LfsMode::Analytic;
  double angle_tol = 0.0;
  CampaignCounts counts;
  std::uint64_t violations_new = 0;
  std::uint64_t violations_log = 0;
  double max_ratio_log = 0.0;  ///< max angle / bound_log over pairs with eps > 0
  double max_ratio_new = 0.0;
  double max_eps = 0.0;
  /// Margins bound_log - angle in 50 bins of width 0.01 over [0, 0.5];
  /// values outside the range land in the edge bins.
  std::array<std::uint64_t, kHistogramBins> margin_histogram{};
  CampaignDiagnostics diagnostics;
  double wall_time_s = 0.0;
  std::string version;

  bool operator==(const CampaignReport&) const = default;
};

/// Monte-Carlo campaign. Pair i draws from its own generator seeded by
/// (seed, i), and partial results are merged in index order, so the report
/// does not depend on the worker count.
CampaignReport run_campaign(const CampaignConfig& config,
                            std::vector<PairRecord>* records = nullptr);

}  // namespace lfslab
