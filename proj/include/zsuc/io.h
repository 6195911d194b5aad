#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace zsuc {

// Whole-file helpers. Failures throw DataError naming the path.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Lines without trailing '\n' / "\r\n". A final unterminated line is kept.
std::vector<std::string> split_lines(std::string_view bytes);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

// Shortest-exact formatting is not required; 17 significant digits always
// round-trip a double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace zsuc
