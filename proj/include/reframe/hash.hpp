#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace reframe {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

// Digest of a file's contents; throws DataError when unreadable.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace reframe
