#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace credanno::text {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Strict whole-token parses; return false on any trailing garbage.
bool parse_double(std::string_view token, double& out);
bool parse_int(std::string_view token, long long& out);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

}  // namespace credanno::text
