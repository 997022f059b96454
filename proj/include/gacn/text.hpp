#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the file readers.
namespace gacn::text {

// Fields separated by whitespace and/or commas; empty fields are dropped.
std::vector<std::string_view> split_fields(std::string_view line);

// Leading and trailing whitespace removed.
std::string_view trim(std::string_view s) noexcept;

bool is_unsigned_integer(std::string_view s) noexcept;

// "007" -> "7"; "0" stays "0".
std::string strip_leading_zeros(std::string_view s);

// Numeric order (for canonical unsigned integers) or lexicographic order.
void sort_ids(std::vector<std::string>& ids, bool numeric);

double parse_double(std::string_view s, const std::string& path, std::size_t line);
long long parse_int(std::string_view s, const std::string& path, std::size_t line);

// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

}  // namespace gacn::text
