#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace geonet {

/// Writes to a sibling temporary file and renames it into place, so a failed
/// write never leaves a partial artifact. Throws DataError on I/O failure.
void write_file_atomic(const std::filesystem::path& path, std::span<const char> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);
inline void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, std::string_view(text));
}

}  // namespace geonet
