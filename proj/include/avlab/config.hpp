#pragma once

// ExperimentConfig <-> JSON, and the sectioned key=value file format.
//
//   [data]
//   separation = 2.5
//   [model]
//   hidden = 64,64
//
// Sections map onto the JSON objects of the same name; keys outside any
// section land at the top level.

#include <cstdint>
#include <string>

#include <json.hpp>

#include "avlab/harness.hpp"

namespace avlab {

nlohmann::json config_to_json(const ExperimentConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

// Values are typed on sight: true/false, numbers, comma lists, else strings.
nlohmann::json parse_key_value(const std::string& text, const std::string& origin = "<text>");

// *.json is parsed as JSON, anything else as key=value. Throws IoError if
// the file cannot be read and InvalidArgument on malformed content.
nlohmann::json read_config_file(const std::string& path);

// FNV-1a over the canonical (sorted-key) JSON dump.
std::uint64_t config_hash(const nlohmann::json& j);
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

}  // namespace avlab
