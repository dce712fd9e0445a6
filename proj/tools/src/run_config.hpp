#pragma once

#include <filesystem>
#include <string>

#include "CLI11.hpp"

namespace klcpd::cli {

/// Fills every option of `sub` that was not given on the command line from
/// a flat key=value file. Keys are long option names without dashes;
/// manifest.* keys are skipped, any other unknown key is a ConfigError.
void apply_config_file(CLI::App& sub, const std::filesystem::path& path);

/// Resolved options of `sub` as key=value lines, minus --config.
std::string resolved_config(const CLI::App& sub);

}  // namespace klcpd::cli
