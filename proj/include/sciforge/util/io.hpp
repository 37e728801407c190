#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace sciforge::io {

std::string read_file(const std::filesystem::path& path);
// Writes atomically enough for our purposes: truncates and writes in binary mode.
void write_file(const std::filesystem::path& path, std::string_view content);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace sciforge::io
