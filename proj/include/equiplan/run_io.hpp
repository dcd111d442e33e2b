#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "equiplan/experiments.hpp"

namespace equiplan {

// Parses a TOML document into JSON (tables become objects, arrays stay
// arrays). Dates and times are rejected. Throws kConfig on parse errors.
nlohmann::json parse_toml(const std::string& text, const std::string& source = "<string>");
nlohmann::json load_toml_file(const std::filesystem::path& path);

/// Writes every CSV of `output` into `dir`, each with a `<stem>.json` sidecar
/// holding the resolved config, its hash, the version and the wall time, plus
/// `summary.json` for the whole run.
void write_run(const std::filesystem::path& dir, const std::string& command, const nlohmann::json& resolved,
               const ExperimentOutput& output, double wall_seconds);

}  // namespace equiplan
