#pragma once

// Task dispatch and report serialization. A run produces one JSON report
// (deterministic except for the wall_clock_ms field) plus optional CSV
// side-files for tabular outputs.

#include "affdim/config.hpp"

#include <json.hpp>

#include <string>

namespace affdim {

/// Executes the configured task and returns the report body.
nlohmann::json run_task(const ExperimentConfig& cfg);

/// Serializes with sorted keys and a trailing newline; stable for diffing.
std::string render_report(const nlohmann::json& report);

void write_text_file(const std::string& path, const std::string& content);

/// IEEE double as text with 17 significant digits; -inf prints as "-inf".
std::string csv_double(double v);

nlohmann::json spectrum_to_json(const LyapunovSpectrum& spec);
nlohmann::json dim_value_to_json(const DimValue& v);
nlohmann::json dim_estimate_to_json(const DimEstimate& e, const std::string& provenance);

}  // namespace affdim
