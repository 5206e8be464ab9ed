#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "railguard/simulation.hpp"

namespace railguard {

/// Parses the sectioned scenario text ([network], [trains], [constants],
/// [run]) and validates the result. `source` names the input in diagnostics.
/// Throws ParseError (with line and field) or ValidationError.
Scenario parse_scenario(std::string_view text, std::string_view source = "<scenario>");

/// Reads and parses a scenario file. Throws std::runtime_error if unreadable.
Scenario load_scenario(const std::filesystem::path& path);

/// Text that parse_scenario reads back into an equivalent scenario.
std::string write_scenario(const Scenario& scenario);

}  // namespace railguard
