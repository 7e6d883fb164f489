#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsers and prompt builders.
namespace crashrepro::text {

std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
/// Lowercases and collapses every whitespace run into one space.
std::string normalize_phrase(std::string_view s);
std::vector<std::string> split_lines(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix) noexcept;

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
/// fnv1a64 rendered as 16 lowercase hex digits.
std::string fingerprint(std::string_view bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace crashrepro::text
