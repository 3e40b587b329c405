#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "iabsim/experiment.hpp"
#include "iabsim/scenario.hpp"
#include "iabsim/solver_pi.hpp"

namespace iabsim {

using Json = nlohmann::json;

void to_json(Json& j, const Position3D& p);
void from_json(const Json& j, Position3D& p);

void to_json(Json& j, const Scenario& s);
void from_json(const Json& j, Scenario& s);

void to_json(Json& j, const Solution& s);
void from_json(const Json& j, Solution& s);

void to_json(Json& j, const MetricsSummary& m);
void from_json(const Json& j, MetricsSummary& m);

/**
 * Parses an experiment config. Radio and propagation quantities may be given
 * in linear units (`noise_power_w`) or logarithmic ones (`noise_power_dbm`),
 * never both. Unknown keys are rejected. Throws ConfigError.
 */
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);

/// Canonical form using linear keys; parse_config(config_to_json(c)) == c.
Json config_to_json(const ExperimentConfig& config);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// RFC 4180 field quoting: fields containing comma, quote, CR or LF are quoted.
std::string csv_field(std::string_view text);

void write_trace_csv(std::ostream& os, std::span<const TraceRow> rows);

/// Writes `text` to `path`, throwing std::runtime_error if the file cannot be written.
void write_file(const std::string& path, const std::string& text);

}  // namespace iabsim
