#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace twinworld {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// 64-bit mix used to derive independent RNG streams from (seed, key, step).
std::uint64_t mix_seed(std::uint64_t seed, std::string_view key, std::uint64_t step = 0);

}  // namespace twinworld
