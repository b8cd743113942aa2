#pragma once

#include <map>
#include <string>

#include "adaptisent/core.hpp"

namespace adaptisent {

// Flat key = value text format, '#' comments, keys mirroring the RunConfig
// field names. Unknown keys are rejected so typos fail loudly.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);
std::string run_config_to_string(const RunConfig& config);

struct SyntheticSpec;
SyntheticSpec parse_synthetic_spec(const std::string& text);
SyntheticSpec load_synthetic_spec(const std::string& path);

// Shared low-level parser; returns insertion-ordered pairs.
std::map<std::string, std::string> parse_key_values(const std::string& text);

bool parse_bool(const std::string& value, const std::string& key);

} // namespace adaptisent
