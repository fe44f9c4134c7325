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

#include <lfslab/campaign.hpp>

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>

namespace lfslab {

using KeyValues = std::map<std::string, std::string>;

/// Splits a config document into key/value pairs: one `key = value` per
/// line, `#` starts a comment, surrounding double quotes on values are
/// stripped. Duplicate keys are an error.
KeyValues parse_key_values(std::string_view text);

/// Builds and validates a config. Unknown keys, malformed or out-of-range
/// values and missing required keys (surface, eps_max, n_pairs, seed) raise
/// ConfigError naming the keys involved.
CampaignConfig config_from_key_values(const KeyValues& values);

inline CampaignConfig parse_config(std::string_view text) {
  return config_from_key_values(parse_key_values(text));
}

enum class ReportFormat { Json, CsvSummary };

struct EmitOptions {
  /// Include wall_time_s. Off by default so that equal seeds give
  /// byte-identical reports.
  bool timing = false;
};

std::string emit_report(const CampaignReport& report, ReportFormat format,
                        EmitOptions options = {});

/// Inverse of emit_report(..., ReportFormat::Json, ...).
CampaignReport report_from_json(std::string_view text);

/// CSV eps,angle,bound_log,bound_new per pair.
void write_plot_data(std::ostream& out, std::span<const PairRecord> records);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

}  // namespace lfslab
