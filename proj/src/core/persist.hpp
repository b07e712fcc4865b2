#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace jobtitle::persist {

std::string read_file(const std::filesystem::path& path);
// Creates parent directories; throws ErrorKind::Io on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);
void ensure_directory(const std::filesystem::path& dir);

// Shortest round-trip form ("%.17g").
std::string format_double(double value);
// Strict: the whole field must parse. Throws ErrorKind::Integrity.
double parse_double(std::string_view field);
std::size_t parse_size(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep);
// Lines without their terminators; a trailing newline yields no empty line.
std::vector<std::string_view> lines(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes);
std::string checksum_hex(std::string_view bytes);

}  // namespace jobtitle::persist
