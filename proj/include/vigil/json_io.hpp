#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "vigil/errors.hpp"

namespace vigil {

using json = nlohmann::json;

// All reports and logs carry numbers quantized to millisecond / millimeter
// resolution so serialized output is byte-stable across runs.
inline double quantize3(double x) { return std::round(x * 1000.0) / 1000.0; }

// Percent values are reported at 2 decimals.
inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

// Parses JSON text, converting byte offsets in parse errors to line numbers.
// `origin` names the file in diagnostics.
json parse_json_lined(const std::string& text, const std::string& origin);

json load_json_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace vigil
