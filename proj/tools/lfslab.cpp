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
#include <lfslab/geodesic.hpp>
#include <lfslab/report.hpp>
#include <lfslab/runtime.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace lfslab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

struct SurfaceOptions {
  std::string name = "sphere";
  std::vector<std::string> params;
  std::string lfs_mode;
  std::size_t medial_contacts = 500;
  std::uint64_t medial_seed = 0;
};

void add_surface_options(CLI::App* cmd, SurfaceOptions& o) {
  cmd->add_option("--surface", o.name, "Catalog surface")
      ->check(CLI::IsMember({"sphere", "torus", "ellipsoid", "metaball_blend"}));
  cmd->add_option("--param", o.params, "Surface parameter key=value (repeatable)");
  cmd->add_option("--lfs-mode", o.lfs_mode, "analytic | numeric (default: analytic if available)")
      ->check(CLI::IsMember({"analytic", "numeric"}));
  cmd->add_option("--medial-contacts", o.medial_contacts, "Contacts for numeric feature size");
  cmd->add_option("--medial-seed", o.medial_seed, "Seed for numeric feature size");
}

std::map<std::string, std::string> param_map(const std::vector<std::string>& params) {
  std::map<std::string, std::string> out;
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("--param: expected key=value, got '" + p + "'");
    out[p.substr(0, eq)] = p.substr(eq + 1);
  }
  return out;
}

FeatureSize build_model(const SurfaceOptions& o) {
  const auto surface = ImplicitSurface::from_catalog(o.name, param_map(o.params));
  const bool analytic = o.lfs_mode.empty() ? has_analytic_medial_axis(surface)
                                           : lfs_mode_from_string(o.lfs_mode) == LfsMode::Analytic;
  if (analytic) return FeatureSize::analytic(surface);
  return FeatureSize::numeric(surface, o.medial_contacts, o.medial_seed);
}

Vector3d parse_point(const std::string& flag, const std::string& text) {
  std::stringstream ss(text);
  Vector3d v;
  std::string token;
  int i = 0;
  while (std::getline(ss, token, ',')) {
    if (i == 3) break;
    try {
      std::size_t used = 0;
      v[i] = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": expected x,y,z, got '" + text + "'");
    }
    ++i;
  }
  if (i != 3 || std::getline(ss, token)) throw ConfigError(flag + ": expected x,y,z, got '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& flag, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string token; std::getline(ss, token, ',');) {
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError(flag + ": expected a comma-separated list of numbers");
    }
  }
  return out;
}

/// Writes to `path`, or stdout when path is empty or "-".
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vector3d maybe_project(const ImplicitSurface& surface, const Vector3d& x, bool enabled) {
  return enabled ? project(surface, x).foot : x;
}

// --- surfaces --------------------------------------------------------------

int cmd_surfaces() {
  std::cout << "name            parameters (defaults)                      lfs modes\n"
               "sphere          R=1 cx=0 cy=0 cz=0                         analytic, numeric\n"
               "torus           R=2 r=1                                    analytic, numeric\n"
               "ellipsoid       a=3 b=2 c=1                                numeric\n"
               "metaball_blend  k=8 balls=\"0 0 0 1 1; 1.2 0 0 0.8 1\"       numeric\n";
  return kExitOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyOptions {
  SurfaceOptions surface;
  std::string q, q2;
  bool project_inputs = false;
};

int cmd_verify(const VerifyOptions& o) {
  const auto model = build_model(o.surface);
  const Vector3d q = maybe_project(model.surface(), parse_point("--q", o.q), o.project_inputs);
  const Vector3d q2 = maybe_project(model.surface(), parse_point("--q2", o.q2), o.project_inputs);
  const auto r = verify_pair(model, q, q2);
  std::cout << "surface    " << model.surface().describe() << " (" << to_string(model.mode())
            << " lfs)\n"
            << "dist       " << format_double(r.dist) << "\n"
            << "f(q)       " << format_double(r.q.lfs) << "\n"
            << "f(q2)      " << format_double(r.q2.lfs) << "\n"
            << "eps_thm    " << format_double(r.eps_thm) << "\n"
            << "eps_ab     " << format_double(r.eps_ab) << "\n"
            << "angle      " << format_double(r.angle) << "\n"
            << "bound_log  " << format_double(r.bound_log) << (r.pass_log ? "  pass" : "  FAIL")
            << "\n"
            << "bound_new  " << format_double(r.bound_new) << (r.pass_new ? "  pass" : "  FAIL")
            << "\n"
            << "bound_ab   " << format_double(r.bound_ab) << "\n";
  return r.pass_log && r.pass_new ? kExitOk : kExitViolation;
}

// --- campaign ----------------------------------------------------------------

struct CampaignOptions {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> params;
  std::string format = "json";
  std::string plot_data;
  bool timing = false;
};

int cmd_campaign(const CampaignOptions& o) {
  KeyValues values;
  if (!o.config_path.empty()) values = parse_key_values(read_file(o.config_path));
  for (const auto& [key, value] : o.overrides) values[key] = value;
  for (const auto& [key, value] : param_map(o.params)) values["surface." + key] = value;
  const CampaignConfig config = config_from_key_values(values);

  std::vector<PairRecord> records;
  const auto report = run_campaign(config, o.plot_data.empty() ? nullptr : &records);
  const auto format = o.format == "csv" ? ReportFormat::CsvSummary : ReportFormat::Json;
  write_output(config.out_path, emit_report(report, format, {.timing = o.timing}));
  if (!o.plot_data.empty()) {
    std::ostringstream plot;
    write_plot_data(plot, records);
    write_output(o.plot_data, plot.str());
  }

  const auto& d = report.diagnostics;
  bool ok = report.violations_new == 0 && report.violations_log == 0;
  ok = ok && d.omega_checks_passed == d.trace_samples && d.rate_checks_passed == d.trace_samples &&
       d.integration_passed + d.traces_failed == d.traces_run;
  for (double ratio : d.claim3_final_ratios) ok = ok && ratio <= 1.0 + 1e-3;
  std::cerr << "pairs " << report.counts.pairs << ", passed " << report.counts.passed
            << ", violated " << report.counts.violated << ", rejected " << report.counts.rejected
            << ", discarded " << report.counts.discarded << "; max angle/bound_log "
            << format_double(report.max_ratio_log) << "\n";
  return ok ? kExitOk : kExitViolation;
}

// --- trace -------------------------------------------------------------------

struct TraceOptions {
  SurfaceOptions surface;
  std::string q, q2;
  std::size_t steps = 1000;
  std::string out;
  bool project_inputs = false;
};

int cmd_trace(const TraceOptions& o) {
  const auto model = build_model(o.surface);
  const Vector3d q = maybe_project(model.surface(), parse_point("--q", o.q), o.project_inputs);
  const Vector3d q2 = maybe_project(model.surface(), parse_point("--q2", o.q2), o.project_inputs);
  const auto trace = integrate_theta(model, q, q2, o.steps);
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  write_output(o.out, csv.str());
  std::cerr << "eps " << format_double(trace.eps) << ", angle " << format_double(trace.angle)
            << ", integrated " << format_double(trace.integrated_angle) << "; omega bound "
            << (trace.omega_ok ? "ok" : "FAIL") << ", rate bound "
            << (trace.rate_ok ? "ok" : "FAIL") << ", integration "
            << (trace.integration_ok ? "ok" : "FAIL") << "\n";
  return trace.ok() ? kExitOk : kExitViolation;
}

// --- probe -------------------------------------------------------------------

struct ProbeOptions {
  SurfaceOptions surface;
  std::string p, q, direction;
  std::string deltas;
  std::string out;
  std::size_t n_contacts = 500;
  std::uint64_t seed = 0;
};

std::vector<double> halving(double from, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(std::ldexp(from, -i));
  return out;
}

int probe_claim3(const ProbeOptions& o) {
  const auto model = build_model(o.surface);
  const Vector3d p = parse_point("--p", o.p);
  const Vector3d dir = parse_point("--dir", o.direction).normalized();
  const auto deltas = o.deltas.empty() ? halving(std::ldexp(model(project(model.surface(), p).foot), -4), 13)
                                       : parse_list("--deltas", o.deltas);
  const auto ratios = claim3_probe(model, p, dir, deltas);
  std::ostringstream csv;
  csv << "dt,ratio\n";
  for (const auto& [dt, ratio] : ratios) csv << format_double(dt) << ',' << format_double(ratio) << '\n';
  write_output(o.out, csv.str());
  return ratios.empty() || ratios.back().second <= 1.0 + 1e-3 ? kExitOk : kExitViolation;
}

int probe_prop1(const ProbeOptions& o) {
  const auto model = build_model(o.surface);
  const Vector3d p = parse_point("--p", o.p);
  const auto patch = make_patch(model, p);
  const Vector3d dir = parse_point("--dir", o.direction).normalized();
  const auto scales = o.deltas.empty() ? halving(0.2 * model(patch.anchor_foot), 5)
                                       : parse_list("--deltas", o.deltas);
  const auto ratios = prop1_ratio(patch, p, dir, scales);
  std::ostringstream csv;
  csv << "delta,ratio\n";
  bool ok = true;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    csv << format_double(ratios[i].first) << ',' << format_double(ratios[i].second) << '\n';
    ok = ok && ratios[i].second >= 1.0 && (i == 0 || ratios[i].second <= ratios[i - 1].second);
  }
  if (!ratios.empty()) {
    const double d = ratios.back().first;
    ok = ok && ratios.back().second <= 1.0 + 10.0 * d * d;
  }
  write_output(o.out, csv.str());
  return ok ? kExitOk : kExitViolation;
}

int probe_prop2(const ProbeOptions& o) {
  const auto model = build_model(o.surface);
  const Vector3d p = parse_point("--p", o.p);
  const Vector3d q = parse_point("--q", o.q);
  const auto path = trace_geodesic(make_patch(model, p), p, q);
  const auto check = prop2_check(path);
  if (!o.out.empty()) {
    std::ostringstream csv;
    write_path_csv(csv, path);
    write_output(o.out, csv.str());
  }
  const bool ok = check.angle <= check.bound + 1e-7;
  std::cout << "length " << format_double(path.length) << "\nkappa_max "
            << format_double(path.kappa_max) << "\nangle " << format_double(check.angle)
            << "\nbound " << format_double(check.bound) << (ok ? "  pass" : "  FAIL") << "\n";
  return ok ? kExitOk : kExitViolation;
}

int probe_medial(const ProbeOptions& o) {
  const auto surface = ImplicitSurface::from_catalog(o.surface.name, param_map(o.surface.params));
  const auto cloud = medial_sample(surface, o.n_contacts, o.seed);
  std::ostringstream csv;
  write_medial_csv(csv, cloud);
  write_output(o.out, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal-variation bounds on implicit surfaces"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  app.add_subcommand("surfaces", "List catalog surfaces");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check the bounds for one pair of surface points");
  add_surface_options(verify_cmd, verify.surface);
  verify_cmd->add_option("--q", verify.q, "First point x,y,z")->required();
  verify_cmd->add_option("--q2", verify.q2, "Second point x,y,z")->required();
  verify_cmd->add_flag("--project", verify.project_inputs, "Project the points onto the surface");

  CampaignOptions campaign;
  auto* campaign_cmd = app.add_subcommand("campaign", "Monte-Carlo campaign over random pairs");
  campaign_cmd->add_option("--config", campaign.config_path, "key = value config file");
  for (const char* key : {"surface", "eps_max", "n_pairs", "n_traces", "steps", "seed", "lfs_mode",
                          "n_probes", "medial_contacts", "out_path"}) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin() + 2, flag.end(), '_', '-');
    campaign_cmd->add_option_function<std::string>(
        flag, [&campaign, key](const std::string& v) { campaign.overrides[key] = v; },
        std::string("Overrides config key ") + key);
  }
  campaign_cmd->add_option("--param", campaign.params, "Surface parameter key=value (repeatable)");
  campaign_cmd->add_option("--format", campaign.format, "json | csv")
      ->check(CLI::IsMember({"json", "csv"}));
  campaign_cmd->add_option("--plot-data", campaign.plot_data,
                           "Also write eps,angle,bound_log,bound_new per pair");
  campaign_cmd->add_flag("--timing", campaign.timing, "Include wall time in the report");

  TraceOptions trace;
  auto* trace_cmd = app.add_subcommand("trace", "theta(t) along the segment q q2 as CSV");
  add_surface_options(trace_cmd, trace.surface);
  trace_cmd->add_option("--q", trace.q, "First point x,y,z")->required();
  trace_cmd->add_option("--q2", trace.q2, "Second point x,y,z")->required();
  trace_cmd->add_option("--steps", trace.steps, "Segment samples")->check(CLI::Range(100, 10000000));
  trace_cmd->add_option("--out", trace.out, "CSV path (default stdout)");
  trace_cmd->add_flag("--project", trace.project_inputs, "Project the points onto the surface");

  ProbeOptions probe;
  auto* probe_cmd = app.add_subcommand("probe", "Limit and geodesic probes");
  probe_cmd->require_subcommand(1);
  auto* claim3 = probe_cmd->add_subcommand("claim3", "d(p,r)/dt as dt shrinks");
  auto* prop1 = probe_cmd->add_subcommand("prop1", "geodesic/chord ratio as the chord shrinks");
  auto* prop2 = probe_cmd->add_subcommand("prop2", "normal angle versus kappa_max times length");
  auto* medial = probe_cmd->add_subcommand("medial", "shrinking-ball medial cloud as CSV");
  for (auto* cmd : {claim3, prop1, prop2, medial}) {
    add_surface_options(cmd, probe.surface);
    cmd->add_option("--out", probe.out, "CSV path (default stdout)");
  }
  for (auto* cmd : {claim3, prop1, prop2}) cmd->add_option("--p", probe.p, "Point x,y,z")->required();
  for (auto* cmd : {claim3, prop1}) {
    cmd->add_option("--dir", probe.direction, "Direction x,y,z")->required();
    cmd->add_option("--deltas", probe.deltas, "Decreasing step list (default: halving)");
  }
  prop2->add_option("--q", probe.q, "End point x,y,z on the level set of p")->required();
  medial->add_option("--n-contacts", probe.n_contacts, "Contacts (>= 100)");
  medial->add_option("--seed", probe.seed, "Sampling seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("surfaces")) return cmd_surfaces();
    if (verify_cmd->parsed()) return cmd_verify(verify);
    if (campaign_cmd->parsed()) return cmd_campaign(campaign);
    if (trace_cmd->parsed()) return cmd_trace(trace);
    if (claim3->parsed()) return probe_claim3(probe);
    if (prop1->parsed()) return probe_prop1(probe);
    if (prop2->parsed()) return probe_prop2(probe);
    if (medial->parsed()) return probe_medial(probe);
  } catch (const Error& e) {
    std::cerr << "lfslab: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
