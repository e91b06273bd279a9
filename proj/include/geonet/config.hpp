#pragma once

#include <filesystem>
#include <string_view>

#include "geonet/trainer.hpp"

namespace geonet {

/**
 * Flat `key = value` lines; `#` starts a comment. Unknown keys, repeated keys
 * and malformed values throw ConfigError naming the key. A relative data_dir
 * is resolved against base_dir.
 */
TrainConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
TrainConfig load_config(const std::filesystem::path& path);

}  // namespace geonet
