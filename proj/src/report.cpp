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
#include <lfslab/report.hpp>

#include <json.hpp>

#include <charconv>
#include <ostream>
#include <sstream>

namespace lfslab {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  return value;
}

std::uint64_t to_count(const std::string& key, const std::string& text) {
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
  return value;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<double> read_optional(const ordered_json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

KeyValues parse_key_values(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, std::string(value)).second) throw ConfigError(key + ": duplicate key");
  }
  return out;
}

CampaignConfig config_from_key_values(const KeyValues& values) {
  CampaignConfig c;
  std::vector<std::string> missing;
  for (const char* required : {"surface", "eps_max", "n_pairs", "seed"})
    if (!values.count(required)) missing.emplace_back(required);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError("missing required keys: " + list);
  }

  for (const auto& [key, value] : values) {
    if (key == "surface") {
      c.surface = value;
    } else if (key.rfind("surface.", 0) == 0) {
      c.surface_params[key.substr(8)] = value;
    } else if (key == "eps_max") {
      c.eps_max = to_double(key, value);
      if (!(c.eps_max > 0.0)) throw ConfigError("eps_max: must be > 0 (got " + value + ")");
      if (!(c.eps_max <= kEpsMax))
        throw ConfigError("eps_max: must be <= 1/3, the theorem's limit (got " + value + ")");
    } else if (key == "n_pairs") {
      c.n_pairs = to_count(key, value);
    } else if (key == "n_traces") {
      c.n_traces = to_count(key, value);
    } else if (key == "steps") {
      c.steps = to_count(key, value);
    } else if (key == "seed") {
      c.seed = to_count(key, value);
    } else if (key == "n_probes") {
      c.n_probes = to_count(key, value);
    } else if (key == "medial_contacts") {
      c.medial_contacts = to_count(key, value);
    } else if (key == "lfs_mode") {
      c.lfs_mode = lfs_mode_from_string(value);
    } else if (key == "out_path") {
      c.out_path = value;
    } else {
      throw ConfigError(key + ": unknown key");
    }
  }
  validate(c);
  // Surface parameters and lfs_mode availability are checked against the
  // actual catalog entry.
  const auto surface = ImplicitSurface::from_catalog(c.surface, c.surface_params);
  resolve_lfs_mode(c, surface);
  return c;
}

std::string emit_report(const CampaignReport& r, ReportFormat format, EmitOptions options) {
  if (format == ReportFormat::CsvSummary) {
    const auto& d = r.diagnostics;
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    std::ostringstream os;
    os << "surface,lfs_mode,eps_max,n_pairs,seed,pairs,passed,violated,rejected,discarded,"
          "violations_new,violations_log,max_ratio_log,max_ratio_new,max_eps,traces_run,"
          "omega_pass_rate,rate_pass_rate,integration_pass_rate,version\n";
    os << r.config.surface << ',' << to_string(r.lfs_mode) << ',' << format_double(r.config.eps_max)
       << ',' << r.config.n_pairs << ',' << r.config.seed << ',' << r.counts.pairs << ','
       << r.counts.passed << ',' << r.counts.violated << ',' << r.counts.rejected << ','
       << r.counts.discarded << ',' << r.violations_new << ',' << r.violations_log << ','
       << format_double(r.max_ratio_log) << ',' << format_double(r.max_ratio_new) << ','
       << format_double(r.max_eps) << ',' << d.traces_run << ',' << opt(d.omega_pass_rate) << ','
       << opt(d.rate_pass_rate) << ',' << opt(d.integration_pass_rate) << ',' << r.version
       << '\n';
    return os.str();
  }

  const auto& c = r.config;
  ordered_json params = ordered_json::object();
  for (const auto& [k, v] : c.surface_params) params[k] = v;
  ordered_json config = {
      {"surface", c.surface},
      {"surface_params", params},
      {"eps_max", c.eps_max},
      {"n_pairs", c.n_pairs},
      {"n_traces", c.n_traces},
      {"steps", c.steps},
      {"seed", c.seed},
      {"lfs_mode", c.lfs_mode ? ordered_json(to_string(*c.lfs_mode)) : ordered_json(nullptr)},
      {"n_probes", c.n_probes},
      {"medial_contacts", c.medial_contacts},
      {"out_path", c.out_path},
  };
  const auto& d = r.diagnostics;
  ordered_json diag = {
      {"traces_run", d.traces_run},
      {"traces_failed", d.traces_failed},
      {"trace_samples", d.trace_samples},
      {"omega_checks_passed", d.omega_checks_passed},
      {"rate_checks_passed", d.rate_checks_passed},
      {"integration_passed", d.integration_passed},
      {"omega_pass_rate", optional_number(d.omega_pass_rate)},
      {"rate_pass_rate", optional_number(d.rate_pass_rate)},
      {"integration_pass_rate", optional_number(d.integration_pass_rate)},
      {"probes_run", d.probes_run},
      {"probes_failed", d.probes_failed},
      {"claim3_final_ratios", d.claim3_final_ratios},
  };
  ordered_json j = {
      {"version", r.version},
      {"config", config},
      {"lfs_mode", to_string(r.lfs_mode)},
      {"angle_tol", r.angle_tol},
      {"counts",
       {{"pairs", r.counts.pairs},
        {"passed", r.counts.passed},
        {"violated", r.counts.violated},
        {"rejected", r.counts.rejected},
        {"discarded", r.counts.discarded}}},
      {"violations_new", r.violations_new},
      {"violations_log", r.violations_log},
      {"max_ratio_log", r.max_ratio_log},
      {"max_ratio_new", r.max_ratio_new},
      {"max_eps", r.max_eps},
      {"margin_histogram",
       {{"lo", 0.0}, {"hi", kHistogramMax}, {"counts", r.margin_histogram}}},
      {"diagnostics", diag},
  };
  if (options.timing) j["wall_time_s"] = r.wall_time_s;
  return j.dump(2) + "\n";
}

CampaignReport report_from_json(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report: invalid JSON: ") + e.what());
  }
  try {
    CampaignReport r;
    r.version = j.at("version").get<std::string>();
    const auto& c = j.at("config");
    r.config.surface = c.at("surface").get<std::string>();
    for (const auto& [k, v] : c.at("surface_params").items())
      r.config.surface_params[k] = v.get<std::string>();
    r.config.eps_max = c.at("eps_max").get<double>();
    r.config.n_pairs = c.at("n_pairs").get<std::uint64_t>();
    r.config.n_traces = c.at("n_traces").get<std::uint64_t>();
    r.config.steps = c.at("steps").get<std::uint64_t>();
    r.config.seed = c.at("seed").get<std::uint64_t>();
    if (!c.at("lfs_mode").is_null())
      r.config.lfs_mode = lfs_mode_from_string(c.at("lfs_mode").get<std::string>());
    r.config.n_probes = c.at("n_probes").get<std::uint64_t>();
    r.config.medial_contacts = c.at("medial_contacts").get<std::uint64_t>();
    r.config.out_path = c.at("out_path").get<std::string>();

    r.lfs_mode = lfs_mode_from_string(j.at("lfs_mode").get<std::string>());
    r.angle_tol = j.at("angle_tol").get<double>();
    const auto& n = j.at("counts");
    r.counts = {n.at("pairs").get<std::uint64_t>(), n.at("passed").get<std::uint64_t>(),
                n.at("violated").get<std::uint64_t>(), n.at("rejected").get<std::uint64_t>(),
                n.at("discarded").get<std::uint64_t>()};
    r.violations_new = j.at("violations_new").get<std::uint64_t>();
    r.violations_log = j.at("violations_log").get<std::uint64_t>();
    r.max_ratio_log = j.at("max_ratio_log").get<double>();
    r.max_ratio_new = j.at("max_ratio_new").get<double>();
    r.max_eps = j.at("max_eps").get<double>();
    const auto bins = j.at("margin_histogram").at("counts").get<std::vector<std::uint64_t>>();
    if (bins.size() != kHistogramBins) throw ConfigError("report: histogram must have 50 bins");
    std::copy(bins.begin(), bins.end(), r.margin_histogram.begin());

    const auto& d = j.at("diagnostics");
    auto& diag = r.diagnostics;
    diag.traces_run = d.at("traces_run").get<std::uint64_t>();
    diag.traces_failed = d.at("traces_failed").get<std::uint64_t>();
    diag.trace_samples = d.at("trace_samples").get<std::uint64_t>();
    diag.omega_checks_passed = d.at("omega_checks_passed").get<std::uint64_t>();
    diag.rate_checks_passed = d.at("rate_checks_passed").get<std::uint64_t>();
    diag.integration_passed = d.at("integration_passed").get<std::uint64_t>();
    diag.omega_pass_rate = read_optional(d.at("omega_pass_rate"));
    diag.rate_pass_rate = read_optional(d.at("rate_pass_rate"));
    diag.integration_pass_rate = read_optional(d.at("integration_pass_rate"));
    diag.probes_run = d.at("probes_run").get<std::uint64_t>();
    diag.probes_failed = d.at("probes_failed").get<std::uint64_t>();
    diag.claim3_final_ratios = d.at("claim3_final_ratios").get<std::vector<double>>();
    if (j.contains("wall_time_s")) r.wall_time_s = j.at("wall_time_s").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("report: missing or mistyped field: ") + e.what());
  }
}

void write_plot_data(std::ostream& out, std::span<const PairRecord> records) {
  out << "eps,angle,bound_log,bound_new\n";
  for (const auto& r : records)
    out << format_double(r.eps_thm) << ',' << format_double(r.angle) << ','
        << format_double(r.bound_log) << ',' << format_double(r.bound_new) << '\n';
}

}  // namespace lfslab
