#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mem/agents/config.hpp"

namespace mem::harness {

/// Checks every field; throws ValidationError naming the first bad one.
void validate(const agents::RunConfig& config);

/// Builds a validated config from a JSON object. Omitted fields take their
/// defaults (k = 5 and beta0 = 0.1 when the loop is on_policy); unknown keys
/// are rejected.
agents::RunConfig config_from_json(const nlohmann::json& j);

/// Every field, defaults included.
nlohmann::json config_to_json(const agents::RunConfig& config);

/// Reads and validates a JSON config. Throws IoError, ParseError (with the
/// byte offset) or ValidationError.
agents::RunConfig load_config(const std::filesystem::path& path);
agents::RunConfig parse_config(const std::string& text);

/// Canonical resolved dump: sorted keys, two-space indent, trailing newline.
std::string dump_config(const agents::RunConfig& config);

/// FNV-1a of the canonical dump with run.output_dir blanked, as 16 hex digits.
std::string config_hash(const agents::RunConfig& config);

}  // namespace mem::harness
