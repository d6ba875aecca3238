#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hca/engine.hpp"

namespace hca {

/// Parses a YAML scenario. Relative path files resolve against `base_dir`.
/// Missing keys keep their defaults; unknown keys and bad values throw
/// ConfigError with the dotted field name.
Scenario parse_scenario(std::string_view yaml_text,
                        const std::filesystem::path& base_dir = std::filesystem::current_path());

/// Reads and parses a scenario file. Throws ConfigError naming the path when unreadable.
Scenario load_scenario(const std::filesystem::path& file);

}  // namespace hca
