#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

// Small text and binary helpers shared by the file formats.
namespace seisseg::io {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

double parse_double(std::string_view text, const std::string& where);
std::uint64_t parse_uint(std::string_view text, const std::string& where);
std::int64_t parse_int(std::string_view text, const std::string& where);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Comma-separated list of unsigned integers, e.g. "6,12,24,32".
std::vector<std::size_t> parse_uint_list(std::string_view text, const std::string& where);
std::string join(std::span<const std::size_t> values, char sep = ',');

void write_le_doubles(std::ostream& out, std::span<const double> values);
/// Reads exactly values.size() doubles; throws FormatError naming `source`
/// and the byte offset on truncation.
void read_le_doubles(std::istream& in, std::span<double> values, const std::string& source);

/// key=value lines; blank lines and lines starting with '#' are skipped.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in, const std::string& source);
void write_key_values(std::ostream& out, const KeyValues& kv);

std::string read_file(const std::filesystem::path& path);

}  // namespace seisseg::io
