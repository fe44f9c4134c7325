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

#include <lfslab/report.hpp>
#include <lfslab/runtime.hpp>

#include <json.hpp>

#include <bit>
#include <charconv>
#include <random>
#include <sstream>

using namespace lfslab;

namespace {

std::string config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

CampaignConfig small_config(std::uint64_t seed) {
  CampaignConfig c;
  c.surface = "sphere";
  c.eps_max = 1.0 / 3.0;
  c.n_pairs = 40;
  c.seed = seed;
  c.n_traces = 2;
  c.steps = 100;
  c.n_probes = 2;
  return c;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
  return out;
}

}  // namespace

TEST_CASE("parse_config accepts the documented schema") {
  const auto c = parse_config(
      "# sphere run\n"
      "surface = sphere\n"
      "surface.R = 1.0\n"
      "eps_max = 0.3333\n"
      "n_pairs = 10000   # pairs\n"
      "seed = 42\n");
  CHECK(c.surface == "sphere");
  CHECK(c.surface_params.at("R") == "1.0");
  CHECK(c.eps_max == 0.3333);
  CHECK(c.n_pairs == 10000);
  CHECK(c.seed == 42);
  CHECK(!c.lfs_mode);

  const auto t = parse_config(
      "surface = torus\nsurface.R = 2\nsurface.r = 1\neps_max = 0.2\nn_pairs = 5\nseed = 1\n"
      "n_traces = 2\nsteps = 300\nlfs_mode = analytic\nout_path = \"out/report.json\"\n");
  CHECK(t.n_traces == 2);
  CHECK(t.steps == 300);
  CHECK(t.lfs_mode == LfsMode::Analytic);
  CHECK(t.out_path == "out/report.json");
}

TEST_CASE("parse_config errors name the offending key") {
  const auto base = std::string("surface = sphere\nn_pairs = 10\nseed = 1\n");
  auto msg = config_error(base + "eps_max = 0.4\n");
  CHECK(msg.find("eps_max") != std::string::npos);
  CHECK(msg.find("1/3") != std::string::npos);

  msg = config_error("");
  for (const char* key : {"surface", "eps_max", "n_pairs", "seed"})
    CHECK(msg.find(key) != std::string::npos);

  CHECK(config_error(base + "eps_max = 0.2\ncolour = blue\n").find("colour") != std::string::npos);
  CHECK(config_error(base + "eps_max = 0.2\nsurface.q = 3\n").find("surface.q") !=
        std::string::npos);
  CHECK(config_error(base + "eps_max = 0.2\nsurface.R = -1\n").find("surface.R") !=
        std::string::npos);
  CHECK(config_error(base + "eps_max = abc\n").find("eps_max") != std::string::npos);
  CHECK(config_error(base + "eps_max = 0.2\nseed = 2\n").find("seed") != std::string::npos);
  CHECK(config_error("surface = sphere\neps_max = 0.2\nn_pairs = 0\nseed = 1\n").find("n_pairs") !=
        std::string::npos);
  CHECK(config_error("surface = sphere\neps_max = 0.2\nn_pairs = -3\nseed = 1\n").find("n_pairs") !=
        std::string::npos);
  CHECK(config_error(base + "eps_max = 0.2\nlfs_mode = exact\n").find("lfs_mode") !=
        std::string::npos);
  CHECK(config_error("surface = ellipsoid\neps_max = 0.2\nn_pairs = 3\nseed = 1\nlfs_mode = "
                     "analytic\n")
            .find("lfs_mode") != std::string::npos);
  CHECK(config_error(base + "eps_max = 0.2\nthis line has no equals\n").find("line 5") !=
        std::string::npos);
}

TEST_CASE("shortest round-trip doubles") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> bits;
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  for (int i = 0; i < 10000; ++i) {
    const double v = std::bit_cast<double>(bits(rng));
    if (!std::isfinite(v)) continue;
    const auto text = format_double(v);
    double back = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(back == v);
  }
}

TEST_CASE("json report round trip and stability") {
  std::vector<PairRecord> records;
  const auto report = run_campaign(small_config(42), &records);
  const auto text = emit_report(report, ReportFormat::Json);
  const auto json = nlohmann::ordered_json::parse(text);
  CHECK(json.at("counts").at("pairs") == 40);
  CHECK(!json.contains("wall_time_s"));
  CHECK(json.begin().key() == "version");
  CHECK(json.at("version") == std::string(kVersion));

  auto expected = report;
  expected.wall_time_s = 0.0;
  CHECK(report_from_json(text) == expected);
  CHECK(emit_report(report_from_json(text), ReportFormat::Json) == text);

  const auto timed = emit_report(report, ReportFormat::Json, {.timing = true});
  CHECK(report_from_json(timed) == report);

  // Same seed, same bytes; different seed, different bytes.
  CHECK(emit_report(run_campaign(small_config(42)), ReportFormat::Json) == text);
  CHECK(emit_report(run_campaign(small_config(43)), ReportFormat::Json) != text);

  CHECK_THROWS_AS(report_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(report_from_json("{}"), ConfigError);
}

TEST_CASE("round trip over generated reports") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::uint64_t> count(0, 1000000);
  std::uniform_real_distribution<double> real(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    CampaignReport r;
    r.config = small_config(count(rng));
    r.config.surface_params = {{"R", format_double(real(rng) + 0.5)}};
    if (i % 3 == 0) r.config.lfs_mode = i % 2 ? LfsMode::Numeric : LfsMode::Analytic;
    r.lfs_mode = i % 2 ? LfsMode::Numeric : LfsMode::Analytic;
    r.angle_tol = i % 2 ? 1e-6 : 1e-9;
    r.counts = {count(rng), count(rng), count(rng), count(rng), count(rng)};
    r.violations_new = count(rng);
    r.violations_log = count(rng);
    r.max_ratio_log = real(rng);
    r.max_ratio_new = real(rng) / 3.0;
    r.max_eps = real(rng) / 3.0;
    for (auto& b : r.margin_histogram) b = count(rng);
    if (i % 4) r.diagnostics.omega_pass_rate = real(rng);
    if (i % 5) r.diagnostics.rate_pass_rate = real(rng);
    if (i % 7) r.diagnostics.integration_pass_rate = real(rng);
    r.diagnostics.traces_run = count(rng);
    r.diagnostics.claim3_final_ratios.resize(i % 4);
    for (auto& v : r.diagnostics.claim3_final_ratios) v = 1.0 - real(rng) * 1e-6;
    r.wall_time_s = real(rng) * 100.0;
    r.version = std::string(kVersion);
    CHECK(report_from_json(emit_report(r, ReportFormat::Json, {.timing = true})) == r);
  }
}

TEST_CASE("csv summary and plot data") {
  CampaignConfig c = small_config(42);
  c.n_pairs = 100;
  std::vector<PairRecord> records;
  const auto report = run_campaign(c, &records);
  const auto csv = emit_report(report, ReportFormat::CsvSummary);
  std::stringstream ss(csv);
  std::string header, row, extra;
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK(!std::getline(ss, extra));
  const auto names = split(header), values = split(row);
  REQUIRE(names.size() == values.size());
  const auto col = std::find(names.begin(), names.end(), "violations_new") - names.begin();
  CHECK(values[col] == "0");

  std::ostringstream plot;
  write_plot_data(plot, records);
  const auto text = plot.str();
  CHECK(text.rfind("eps,angle,bound_log,bound_new\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(records.size() + 1));
}

TEST_CASE("one-pair report reconciles") {
  CampaignConfig c = small_config(5);
  c.n_pairs = 1;
  c.n_traces = 0;
  c.n_probes = 0;
  const auto report = run_campaign(c);
  const auto j = nlohmann::ordered_json::parse(emit_report(report, ReportFormat::Json));
  const auto& n = j.at("counts");
  CHECK(n.at("pairs").get<int>() == n.at("passed").get<int>() + n.at("violated").get<int>() +
                                        n.at("rejected").get<int>() + n.at("discarded").get<int>());
  CHECK(j.at("diagnostics").at("omega_pass_rate").is_null());
}
