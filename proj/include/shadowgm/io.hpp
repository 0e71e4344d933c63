#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace shadowgm::io {

/// Shortest decimal text that parses back to the same double.
/// Non-finite values print as `inf`, `-inf` and `nan`.
std::string fmt(double x);

/// Writes `contents` to `path` through a temporary sibling and a rename, so a
/// reader never sees a partial file. Creates parent directories.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t x);

}  // namespace shadowgm::io
